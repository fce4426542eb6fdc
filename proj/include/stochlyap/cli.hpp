#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "stochlyap/io.hpp"

namespace stochlyap::cli {

inline constexpr const char* kArtifactVersion = "stochlyap-1.0.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kValidation = 2, kNotConverged = 3 };

struct RunRequest {
  std::string kind;  // certify, product, async, lineq, classify
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> steps;
  std::optional<double> tol;
};

struct RunOutput {
  int exit_code = kOk;
  io::Json summary;
  std::string trace_csv;
};

/// Runs one experiment in memory. Library and parse errors propagate.
RunOutput execute(const RunRequest& request);

/// execute() plus atomic writes of summary.json and trace.csv; errors are
/// reported on `err` and mapped to exit codes.
int run(const RunRequest& request, std::ostream& err);

}  // namespace stochlyap::cli
