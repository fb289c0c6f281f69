#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "report_io.hpp"

namespace soblab::cli {

/// Resolved run configuration: defaults, then the --config file, then flags.
struct RunConfig {
  std::string manifold = "euclidean";  // euclidean | cone:THETA | table:PATH
  int n = 3;
  std::optional<double> p;
  double a = 0.0;
  double b = 0.0;
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::optional<int> lambda_count;
  std::optional<double> tol;
  std::string out;
  std::string format = "json";
  double k = std::numeric_limits<double>::infinity();
  int grid_nodes = 4096;
  std::optional<double> s;
  std::uint64_t seed = 20240611;
  int instances = 100;
  std::optional<double> constant;
};

Json to_json(const RunConfig& config);
/// Overlays the keys present in `j` onto `config`; unknown keys are a usage error.
void apply_json(RunConfig& config, const Json& j);

/// Entry point shared by the executable and the tests. Returns the exit
/// status: 0 pass, 2 a checked inequality or tolerance failed, 1 usage or
/// input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

const char* tool_version() noexcept;

}  // namespace soblab::cli
