#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hogsvd/hogsvd.hpp"

namespace hogsvd::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kIoOrParse = 2,
  kRankDeficient = 3,
  kDimensionMismatch = 4,
  kBadArguments = 5,
};

inline constexpr int kReportSchemaVersion = 1;
inline constexpr double kReconstructionTol = 1e-8;
inline constexpr double kSPathTol = 1e-8;
inline constexpr double kBoundTol = 1e-8;
inline constexpr double kCertificateTol = 1e-7;
inline constexpr double kStationarityTol = 1e-6;

/// Exit code for the exception currently being handled (or passed in).
int exit_code_for(const std::exception_ptr& error) noexcept;

struct DecomposeOptions {
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  std::optional<double> pi;
  bool normalize_v = false;
};

struct SweepOptions {
  std::filesystem::path manifest;
  std::string grid;
  std::filesystem::path out_file;
};

struct VerifyOptions {
  std::filesystem::path manifest;
};

struct SubspacesOptions {
  std::filesystem::path manifest;
  std::optional<double> tol;
  bool json = false;
};

int cmd_decompose(const DecomposeOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err);
int cmd_subspaces(const SubspacesOptions& options, std::ostream& out, std::ostream& err);

/// The checks behind `verify`, in table order.
std::vector<ResidualCheck> run_verification(const MatrixSet& set, const HogsvdOptions& options);

/// Parses argv (argv[0] is the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hogsvd::cli
