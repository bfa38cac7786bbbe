#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grad2/analysis.hpp"

namespace grad2::cli {

struct PotentialSpec {
  std::string kind = "quadratic";
  std::size_t dimension = 0;  // 0: infer from the initial condition or u*
  std::map<std::string, double> params;
  // kind == "shifted" only
  std::shared_ptr<PotentialSpec> inner;
  Vec shift;

  Potential build(std::size_t dimension_hint) const;
};

inline const std::vector<std::string> kFigureIds{
    "quad_sweep",    "quad_conservative", "dw_damped",  "dw_conservative",
    "exp_damped",    "exp_conservative",  "exp_sweep"};

struct RunConfig {
  std::string command;  // simulate, sweep, basin, decay, critical, conserve, verify, reproduce
  std::string figure = "all";  // reproduce only

  PotentialSpec potential;
  double a = 0.0;
  Vec u_star;  // empty: origin
  Vec ic;      // positions then velocities

  std::vector<double> a_values;    // sweep
  std::vector<AxisGrid> grid;      // basin: N position axes then N velocity axes
  double a_lo = 0.5, a_hi = 6.0;   // critical
  double tol = 1e-2;               // critical bracket width
  double conv_tol = 1e-3;          // basin / convergence

  double t_max = 10.0;
  IntegratorSettings settings{};
  Method method = Method::kAdaptive;
  double h = 1e-3;  // fixed-step methods

  std::filesystem::path out_dir = ".";
  bool plot = true;
  std::size_t threads = 0;  // 0: hardware concurrency

  /// Potential dimension implied by the config.
  std::size_t dimension() const;
  /// InputError naming the offending field.
  void validate() const;
};

/// Reads a JSON config; every field is optional and keeps its default when
/// absent. InputError on unknown keys or wrong types.
void apply_json(RunConfig& config, const std::string& json_text);

/// Thrown by parse_command_line for --help.
struct HelpRequested {
  std::string text;
};

/// Parses the command line (argv[0] is the program name) into a config,
/// reading --config first so that explicit flags override file values.
/// `env_threads` is the value of GRAD2_THREADS, if set.
RunConfig parse_command_line(int argc, const char* const* argv,
                             std::optional<std::string> env_threads = std::nullopt);

/// Executes a validated config, writing files under config.out_dir and a
/// short summary to `log`. Returns the process exit status.
int run(const RunConfig& config, std::ostream& log);

/// parse_command_line + run with exit-code mapping: 0 success, 2 validation
/// error, 3 numeric failure.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace grad2::cli
