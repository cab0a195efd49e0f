#ifndef KLAB_CLI_HPP
#define KLAB_CLI_HPP

#include <cstdint>
#include <string>

namespace klab::cli {

/// Effective run configuration: JSON config file values overridden by flags.
struct RunConfig {
  int N = 4;
  double p = 2.0;
  double q = 3.0;
  double a = 1.0;
  double b = 1.0;
  double alpha = 3.0;
  double R = 1.0;
  int grid_n = 201;
  bool has_lambda = false;
  double lambda = 0.0;
  double eps = 1e-2;       // bubble scale for per-function subcommands
  bool local = false;      // minimize: constrained local run
  double delta = -1.0;     // local trust radius; <= 0 means 0.2 ||warm||
  std::uint64_t seed = 42;
  std::string out = "out";

  std::string canonical_json(const std::string& subcommand) const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitHypothesis = 2;
inline constexpr int kExitUsage = 64;

/// Dispatch a subcommand; writes artifacts under cfg.out and returns the
/// process exit status.
int run(const std::string& subcommand, const RunConfig& cfg);

/// Full command line entry: parsing, config merging, validation.
int run_main(int argc, const char* const* argv);

}  // namespace klab::cli

#endif  // KLAB_CLI_HPP
