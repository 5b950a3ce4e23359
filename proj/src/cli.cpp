#include "hogsvd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "hogsvd/analysis.hpp"
#include "hogsvd/errors.hpp"
#include "hogsvd/io.hpp"
#include "hogsvd/kernel.hpp"
#include "json.hpp"

namespace hogsvd::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Loaded {
  io::Manifest manifest;
  MatrixSet set;
};

Loaded load(const fs::path& manifest_path) {
  io::Manifest m = io::read_manifest(manifest_path);
  MatrixSet set = io::load_matrix_set(m);
  return {std::move(m), std::move(set)};
}

HogsvdOptions options_from(const io::Manifest& m) {
  HogsvdOptions o;
  o.pi = m.pi;
  o.normalize_v = m.normalize_v;
  o.class_tol = m.class_tol;
  o.rank_tol = m.rank_tol;
  return o;
}

void require_pi_argument(const std::optional<double>& pi) {
  if (pi && !(*pi > 0.0 && std::isfinite(*pi))) throw UsageError("--pi must be a finite positive number");
}

int report_error(std::ostream& err) {
  const auto e = std::current_exception();
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
  } catch (...) {
    err << "error: unknown failure\n";
  }
  return exit_code_for(e);
}

// Columns of R^{-1} Z: A_i w_k = sigma_{i,k} u_{i,k} up to the column scale of V.
Matrix dual_vectors(const HogsvdResult& r) { return solve_upper(r.r, r.z); }

double relative_difference(const Matrix& a, const Matrix& b) {
  const double scale = frobenius_norm(a);
  const double d = frobenius_norm(a - b);
  return scale > 0.0 ? d / scale : d;
}

double s_eigen_residual(const Matrix& s, const HogsvdResult& r) {
  const double sn = frobenius_norm(s);
  double worst = 0.0;
  for (std::size_t k = 0; k < r.v.cols(); ++k) {
    const Vector vk = r.v.col(k);
    Vector sv = s * vk;
    for (std::size_t i = 0; i < sv.size(); ++i) sv[i] -= r.varsigmas[k] * vk[i];
    worst = std::max(worst, norm2(sv) / (sn * norm2(vk)));
  }
  return worst;
}

double bound_violation(const Vector& values, double lo, double hi) {
  double worst = 0.0;
  for (double x : values) worst = std::max({worst, lo - x, x - hi});
  return worst;
}

// A_i^T A_i w = (1/N) A^T A w for every block.
double common_certificate(const MatrixSet& set, const HogsvdResult& r) {
  const auto idx = r.labels.indices(SubspaceLabel::common);
  if (idx.empty()) return 0.0;
  const Matrix w = dual_vectors(r);
  const Matrix total = gram(set.stacked());
  const double scale = frobenius_norm(total);
  const double inv_n = 1.0 / static_cast<double>(set.size());
  double worst = 0.0;
  for (std::size_t k : idx) {
    const Vector wk = w.col(k);
    const Vector tw = total * wk;
    for (const auto& a : set.blocks()) {
      Vector d = gram(a) * wk;
      for (std::size_t j = 0; j < d.size(); ++j) d[j] -= inv_n * tw[j];
      worst = std::max(worst, norm2(d) / (scale * norm2(wk)));
    }
  }
  return worst;
}

// Largest of the N-1 smallest ||A_i w|| / (||A_i||_F ||w||) over isolated columns.
double isolated_certificate(const MatrixSet& set, const HogsvdResult& r) {
  const auto idx = r.labels.indices(SubspaceLabel::isolated);
  if (idx.empty()) return 0.0;
  const Matrix w = dual_vectors(r);
  double worst = 0.0;
  for (std::size_t k : idx) {
    const Vector wk = w.col(k);
    Vector ratios;
    for (const auto& a : set.blocks()) {
      const double an = frobenius_norm(a);
      ratios.push_back(an > 0.0 ? norm2(a * wk) / (an * norm2(wk)) : 0.0);
    }
    std::sort(ratios.begin(), ratios.end());
    worst = std::max(worst, ratios[ratios.size() - 2]);
  }
  return worst;
}

double stationarity(const HogsvdResult& r) {
  const OrthoSet q(r.qr.q, r.pi);
  double worst = 0.0;
  for (auto label : {SubspaceLabel::common, SubspaceLabel::isolated}) {
    for (std::size_t k : r.labels.indices(label)) {
      worst = std::max(worst, norm2(g_pi_gradient(q, r.z.col(k))));
    }
  }
  return worst;
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(3) << x;
  return s.str();
}

std::string fixed4(double x) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << x;
  return s.str();
}

}  // namespace

int exit_code_for(const std::exception_ptr& error) noexcept {
  try {
    std::rethrow_exception(error);
  } catch (const UsageError&) {
    return kBadArguments;
  } catch (const IoError&) {
    return kIoOrParse;
  } catch (const ParseError&) {
    return kIoOrParse;
  } catch (const RankDeficientError&) {
    return kRankDeficient;
  } catch (const DimensionError&) {
    return kDimensionMismatch;
  } catch (const fs::filesystem_error&) {
    return kIoOrParse;
  } catch (...) {
    return kVerificationFailed;
  }
}

std::vector<ResidualCheck> run_verification(const MatrixSet& set, const HogsvdOptions& options) {
  const HogsvdResult r = hogsvd_factor(set, options);
  const std::size_t nb = set.size();
  const double pi = r.pi;
  std::vector<ResidualCheck> checks;

  const Vector rec = reconstruction_residuals(set, r);
  checks.push_back({"reconstruction", *std::max_element(rec.begin(), rec.end()), kReconstructionTol});

  const Matrix s_direct = build_s_pi_direct(set, pi).matrix;
  const Matrix s_via_t = build_s_pi_via_t(r.qr, pi).matrix;
  checks.push_back({"s_path_agreement", relative_difference(s_direct, s_via_t), kSPathTol});
  checks.push_back({"tau_bounds", bound_violation(r.taus, tau_min(nb, pi), tau_max(nb, pi)), kBoundTol});
  checks.push_back({"varsigma_bounds", bound_violation(r.varsigmas, 1.0, varsigma_max(nb, pi)), kBoundTol});
  checks.push_back({"s_eigenpairs", s_eigen_residual(s_direct, r), kSPathTol});
  checks.push_back({"common_certificate", common_certificate(set, r), kCertificateTol});
  checks.push_back({"isolated_certificate", isolated_certificate(set, r), kCertificateTol});
  if (has_reduction_shape(set)) {
    const ReductionDiagnostics d = verify_reductions(set, pi);
    const std::string prefix = d.kind == ReductionKind::svd ? "svd_reduction." : "csd_reduction.";
    for (const auto& c : d.checks) checks.push_back({prefix + c.name, c.value, c.tolerance});
  }
  checks.push_back({"gradient_stationarity", stationarity(r), kStationarityTol});
  return checks;
}

int cmd_decompose(const DecomposeOptions& options, std::ostream& out, std::ostream& err) {
  try {
    require_pi_argument(options.pi);
    const Loaded in = load(options.manifest);
    const MatrixSet& set = in.set;
    HogsvdOptions ho = options_from(in.manifest);
    if (options.pi) ho.pi = options.pi;
    ho.normalize_v = ho.normalize_v || options.normalize_v;
    const HogsvdResult r = hogsvd_factor(set, ho);
    const std::size_t nb = set.size();
    const std::size_t n = set.cols();

    const Matrix s_direct = build_s_pi_direct(set, r.pi).matrix;
    const Matrix s_via_t = build_s_pi_via_t(r.qr, r.pi).matrix;
    const Vector rec = reconstruction_residuals(set, r);

    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec || !fs::is_directory(options.out_dir))
      throw IoError("cannot create output directory " + options.out_dir.string());

    json report;
    report["schema_version"] = kReportSchemaVersion;
    report["tool_version"] = HOGSVD_VERSION;
    report["pi"] = r.pi;
    report["N"] = nb;
    report["n"] = n;
    report["normalize_v"] = r.normalized_v;
    report["tolerances"] = {
        {"class_tol", ho.class_tol},
        {"rank_tol", r.qr.rank_tol},
        {"free_col_tol", free_column_tolerance(n)},
        {"reconstruction_tol", kReconstructionTol},
        {"s_path_tol", kSPathTol},
        {"bound_tol", kBoundTol},
    };
    report["rank"] = {
        {"sigma_min_r", r.qr.sigma_min_r},
        {"sigma_max_r", r.qr.sigma_max_r},
        {"ratio", r.qr.rank_ratio()},
        {"full_rank", r.qr.full_rank},
    };
    json matrices = json::array();
    for (std::size_t i = 0; i < nb; ++i) {
      const std::string u_file = "U_" + std::to_string(i + 1) + ".csv";
      const std::string s_file = "sigma_" + std::to_string(i + 1) + ".csv";
      io::write_csv(options.out_dir / u_file, r.u[i]);
      io::write_csv(options.out_dir / s_file, Matrix(1, n, r.sigmas[i]));
      matrices.push_back({
          {"label", set.labels()[i]},
          {"rows", set.block(i).rows()},
          {"cols", n},
          {"sigma", r.sigmas[i]},
          {"reconstruction_residual", rec[i]},
          {"u_file", u_file},
          {"sigma_file", s_file},
      });
    }
    report["matrices"] = matrices;
    io::write_csv(options.out_dir / "V.csv", r.v);
    io::write_csv(options.out_dir / "Z.csv", r.z);
    report["files"] = {{"V", "V.csv"}, {"Z", "Z.csv"}};
    report["tau"] = r.taus;
    report["varsigma"] = r.varsigmas;
    json subspaces = json::array();
    for (std::size_t k = 0; k < n; ++k) {
      const SubspaceEntry& e = r.labels.entries[k];
      subspaces.push_back({{"index", k + 1},
                           {"label", std::string(to_string(e.label))},
                           {"null_blocks", e.null_blocks},
                           {"distance", e.distance}});
    }
    report["subspaces"] = subspaces;
    report["residuals"] = {
        {"reconstruction_max", *std::max_element(rec.begin(), rec.end())},
        {"s_path_agreement", relative_difference(s_direct, s_via_t)},
        {"s_t_relation", s_eigen_residual(s_direct, r)},
    };
    io::write_text_atomic(options.out_dir / "report.json", report.dump(2) + "\n");

    out << "pi = " << r.pi << ", N = " << nb << ", n = " << n << '\n';
    out << "varsigma:";
    for (double s : r.varsigmas) out << ' ' << fixed4(s);
    out << '\n';
    out << "wrote " << (options.out_dir / "report.json").string() << '\n';
    return kOk;
  } catch (...) {
    return report_error(err);
  }
}

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const io::GridSpec g = io::parse_grid(options.grid);
    const Loaded in = load(options.manifest);
    const Vector grid = make_log_grid(g.lo, g.hi, g.count);
    const SweepResult sw = pi_sweep(in.set, grid);
    const std::size_t n = in.set.cols();

    std::string csv = "kind,pi,index,tau,varsigma,overlap,crossing,simple,match,angle";
    for (std::size_t i = 0; i < n; ++i) csv += ",z_" + std::to_string(i + 1);
    for (std::size_t i = 0; i < n; ++i) csv += ",v_" + std::to_string(i + 1);
    csv += '\n';
    auto append_vectors = [&](const Matrix& z, const Matrix& v, std::size_t k) {
      for (std::size_t i = 0; i < n; ++i) csv += ',' + io::format_double(z(i, k));
      for (std::size_t i = 0; i < n; ++i) csv += ',' + io::format_double(v(i, k));
      csv += '\n';
    };
    for (const auto& p : sw.points) {
      for (std::size_t k = 0; k < n; ++k) {
        csv += "point," + io::format_double(p.pi) + ',' + std::to_string(k + 1) + ',' +
               io::format_double(p.taus[k]) + ',' + io::format_double(p.varsigmas[k]) + ',' +
               io::format_double(p.overlap[k]) + ',' + (p.crossing[k] ? "1" : "0") + ",,,";
        append_vectors(p.z, p.v, k);
      }
    }
    auto append_endpoint = [&](const SweepEndpoint& e, bool at_infinity) {
      const SweepPoint& p = at_infinity ? sw.points.back() : sw.points.front();
      for (std::size_t c = 0; c < n; ++c) {
        const Vector zc = e.eig.eigenvectors.col(c);
        std::size_t best = 0;
        double best_overlap = -1.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double ov = std::abs(dot(zc, p.z.col(k)));
          if (ov > best_overlap) {
            best_overlap = ov;
            best = k;
          }
        }
        const auto angle = endpoint_angle(sw, best, at_infinity);
        csv += std::string(at_infinity ? "t_tilde_infinity,inf," : "t_tilde_zero,0,") +
               std::to_string(c + 1) + ',' + io::format_double(e.eig.eigenvalues[c]) + ",,,0," +
               (e.simple[c] ? "1" : "0") + ',' + std::to_string(best + 1) + ',' +
               (angle ? io::format_double(*angle) : std::string());
        append_vectors(e.eig.eigenvectors, e.v, c);
      }
    };
    append_endpoint(sw.zero, false);
    append_endpoint(sw.infinity, true);
    io::write_text_atomic(options.out_file, csv);

    std::size_t crossings = 0;
    for (const auto& p : sw.points)
      crossings += static_cast<std::size_t>(std::count(p.crossing.begin(), p.crossing.end(), true));
    out << "grid points: " << sw.points.size() << ", tracked curves: " << n
        << ", flagged crossings: " << crossings << '\n';
    out << "wrote " << options.out_file.string() << '\n';
    return kOk;
  } catch (...) {
    return report_error(err);
  }
}

int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const Loaded in = load(options.manifest);
    const auto checks = run_verification(in.set, options_from(in.manifest));
    bool all = true;
    out << std::left << std::setw(32) << "check" << std::setw(12) << "value" << std::setw(12)
        << "tolerance" << "status\n";
    for (const auto& c : checks) {
      all = all && c.passed();
      out << std::left << std::setw(32) << c.name << std::setw(12) << fmt(c.value) << std::setw(12)
          << fmt(c.tolerance) << (c.passed() ? "PASS" : "FAIL") << '\n';
    }
    out << (all ? "all checks passed\n" : "some checks FAILED\n");
    return all ? kOk : kVerificationFailed;
  } catch (...) {
    return report_error(err);
  }
}

int cmd_subspaces(const SubspacesOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.tol && !(*options.tol > 0.0)) throw UsageError("--tol must be positive");
    const Loaded in = load(options.manifest);
    HogsvdOptions ho = options_from(in.manifest);
    if (options.tol) ho.class_tol = *options.tol;
    const HogsvdResult r = hogsvd_factor(in.set, ho);
    const std::size_t nb = in.set.size();
    const std::size_t n = in.set.cols();
    const double smax = varsigma_max(nb, r.pi);

    if (options.json) {
      json rows = json::array();
      for (std::size_t k = 0; k < n; ++k) {
        Vector pattern(nb);
        for (std::size_t i = 0; i < nb; ++i) pattern[i] = r.sigmas[i][k];
        const SubspaceEntry& e = r.labels.entries[k];
        rows.push_back({{"index", k + 1},
                        {"varsigma", r.varsigmas[k]},
                        {"dist_min", r.varsigmas[k] - 1.0},
                        {"dist_max", smax - r.varsigmas[k]},
                        {"label", std::string(to_string(e.label))},
                        {"null_blocks", e.null_blocks},
                        {"sigma", pattern}});
      }
      json doc = {{"pi", r.pi}, {"N", nb}, {"n", n}, {"class_tol", ho.class_tol},
                  {"varsigma_max", smax}, {"subspaces", rows}};
      out << doc.dump(2) << '\n';
      return kOk;
    }
    out << "pi = " << r.pi << ", varsigma range [1, " << fixed4(smax) << "]\n";
    out << std::left << std::setw(7) << "index" << std::setw(10) << "varsigma" << std::setw(10)
        << "d_min" << std::setw(10) << "d_max" << std::setw(15) << "label" << std::setw(4) << "P";
    for (std::size_t i = 0; i < nb; ++i) out << std::setw(10) << ("sigma_" + std::to_string(i + 1));
    out << '\n';
    for (std::size_t k = 0; k < n; ++k) {
      const SubspaceEntry& e = r.labels.entries[k];
      out << std::left << std::setw(7) << k + 1 << std::setw(10) << fixed4(r.varsigmas[k])
          << std::setw(10) << fixed4(r.varsigmas[k] - 1.0) << std::setw(10)
          << fixed4(smax - r.varsigmas[k]) << std::setw(15) << to_string(e.label) << std::setw(4)
          << e.null_blocks;
      for (std::size_t i = 0; i < nb; ++i) out << std::setw(10) << fixed4(r.sigmas[i][k]);
      out << '\n';
    }
    return kOk;
  } catch (...) {
    return report_error(err);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"HO-GSVD and HO-CSD of a set of matrices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(HOGSVD_VERSION));

  DecomposeOptions dec;
  auto* d = app.add_subcommand("decompose", "Factor the matrix set and write report.json plus factor CSVs");
  d->add_option("--manifest", dec.manifest, "Manifest JSON")->required();
  d->add_option("--out", dec.out_dir, "Output directory")->required();
  d->add_option("--pi", dec.pi, "Regularization weight (default 1/N)");
  d->add_flag("--normalize-v", dec.normalize_v, "Scale V to unit columns");

  SweepOptions sw;
  auto* s = app.add_subcommand("sweep", "Track eigenvectors over a log-spaced pi grid");
  s->add_option("--manifest", sw.manifest, "Manifest JSON")->required();
  s->add_option("--grid", sw.grid, "log:LO:HI:K")->required();
  s->add_option("--out", sw.out_file, "Output CSV")->required();

  VerifyOptions ver;
  auto* v = app.add_subcommand("verify", "Run the consistency checks and print a pass/fail table");
  v->add_option("--manifest", ver.manifest, "Manifest JSON")->required();

  SubspacesOptions sub;
  auto* c = app.add_subcommand("subspaces", "Print the subspace classification");
  c->add_option("--manifest", sub.manifest, "Manifest JSON")->required();
  c->add_option("--tol", sub.tol, "Classification tolerance on tau");
  c->add_flag("--json", sub.json, "Machine-readable output");

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << HOGSVD_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadArguments;
  }
  if (d->parsed()) return cmd_decompose(dec, out, err);
  if (s->parsed()) return cmd_sweep(sw, out, err);
  if (v->parsed()) return cmd_verify(ver, out, err);
  return cmd_subspaces(sub, out, err);
}

}  // namespace hogsvd::cli
