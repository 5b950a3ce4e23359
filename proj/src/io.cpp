#include "hogsvd/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hogsvd/errors.hpp"
#include "json.hpp"

namespace hogsvd::io {
namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token, const std::string& where) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(where + ": not a number: '" + std::string(token) + "'");
  }
  if (!std::isfinite(value)) throw ParseError(where + ": non-finite value '" + std::string(token) + "'");
  return value;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return buf.str();
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

Matrix parse_csv(std::string_view text, const std::string& source) {
  std::vector<double> entries;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    std::size_t count = 0;
    while (true) {
      const auto comma = line.find(',');
      entries.push_back(parse_number(line.substr(0, comma), where));
      ++count;
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError(where + ": expected " + std::to_string(cols) + " values, found " +
                       std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(source + ": no data rows");
  return Matrix(rows, cols, std::move(entries));
}

Matrix read_csv(const fs::path& path) { return parse_csv(read_file(path), path.string()); }

std::string to_csv(const Matrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_text_atomic(const fs::path& path, std::string_view text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw IoError("error writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

void write_csv(const fs::path& path, const Matrix& m) { write_text_atomic(path, to_csv(m)); }

Manifest parse_manifest(std::string_view text, const fs::path& base_dir) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("manifest must be a JSON object");

  Manifest m;
  try {
    if (!doc.contains("matrices") || !doc["matrices"].is_array())
      throw ParseError("manifest needs a \"matrices\" array");
    for (const auto& p : doc["matrices"]) {
      const fs::path path = p.get<std::string>();
      m.matrices.push_back(path.is_absolute() ? path : base_dir / path);
    }
    if (doc.contains("labels")) m.labels = doc["labels"].get<std::vector<std::string>>();
    if (doc.contains("pi") && !doc["pi"].is_null()) m.pi = doc["pi"].get<double>();
    if (doc.contains("normalize_v")) m.normalize_v = doc["normalize_v"].get<bool>();
    if (doc.contains("class_tol")) m.class_tol = doc["class_tol"].get<double>();
    if (doc.contains("rank_tol") && !doc["rank_tol"].is_null()) m.rank_tol = doc["rank_tol"].get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest field has the wrong type: ") + e.what());
  }
  if (m.pi && !(*m.pi > 0.0 && std::isfinite(*m.pi))) throw ParseError("manifest: pi must be positive");
  if (!(m.class_tol > 0.0)) throw ParseError("manifest: class_tol must be positive");
  if (m.rank_tol && !(*m.rank_tol > 0.0)) throw ParseError("manifest: rank_tol must be positive");
  return m;
}

Manifest read_manifest(const fs::path& path) {
  Manifest m = parse_manifest(read_file(path), path.parent_path());
  m.source = path;
  return m;
}

MatrixSet load_matrix_set(const Manifest& manifest) {
  std::vector<Matrix> blocks;
  for (const auto& p : manifest.matrices) blocks.push_back(read_csv(p));
  if (!manifest.labels.empty() && manifest.labels.size() != blocks.size())
    throw ParseError("manifest: labels and matrices differ in length");
  return MatrixSet(std::move(blocks), manifest.labels);
}

GridSpec parse_grid(std::string_view spec) {
  const std::string text(spec);
  auto bad = [&]() { return UsageError("grid must look like log:LO:HI:K with 0 < LO <= HI and K >= 2, got '" + text + "'"); };
  if (spec.substr(0, 4) != "log:") throw bad();
  spec.remove_prefix(4);
  std::vector<std::string_view> parts;
  while (true) {
    const auto colon = spec.find(':');
    parts.push_back(spec.substr(0, colon));
    if (colon == std::string_view::npos) break;
    spec.remove_prefix(colon + 1);
  }
  if (parts.size() != 3) throw bad();
  GridSpec g;
  try {
    g.lo = parse_number(parts[0], "grid");
    g.hi = parse_number(parts[1], "grid");
  } catch (const ParseError&) {
    throw bad();
  }
  std::size_t count = 0;
  const auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), count);
  if (ec != std::errc() || ptr != parts[2].data() + parts[2].size()) throw bad();
  g.count = count;
  if (!(g.lo > 0.0) || !(g.hi >= g.lo) || g.count < 2) throw bad();
  return g;
}

}  // namespace hogsvd::io
