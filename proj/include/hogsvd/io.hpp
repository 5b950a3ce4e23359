#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hogsvd/hogsvd.hpp"
#include "hogsvd/matrix.hpp"

namespace hogsvd::io {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

/// One matrix row per line, comma-separated, no header. Blank lines are skipped.
/// Throws ParseError on non-numeric or non-finite tokens and ragged rows.
Matrix parse_csv(std::string_view text, const std::string& source = "<string>");
Matrix read_csv(const std::filesystem::path& path);

std::string to_csv(const Matrix& m);

/// Writes through a temporary file in the same directory and renames it into place.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);
void write_csv(const std::filesystem::path& path, const Matrix& m);

struct Manifest {
  std::filesystem::path source;
  std::vector<std::filesystem::path> matrices;  ///< resolved against the manifest directory
  std::vector<std::string> labels;
  std::optional<double> pi;
  bool normalize_v = false;
  double class_tol = kDefaultClassTol;
  std::optional<double> rank_tol;
};

/// JSON object {"matrices": [...], "labels"?, "pi"?, "normalize_v"?, "class_tol"?, "rank_tol"?}.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
Manifest read_manifest(const std::filesystem::path& path);

MatrixSet load_matrix_set(const Manifest& manifest);

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// "log:LO:HI:K" with 0 < LO <= HI and K >= 2. Throws UsageError otherwise.
GridSpec parse_grid(std::string_view spec);

}  // namespace hogsvd::io
