#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctf/experiments.hpp"
#include "ctf/oracle.hpp"
#include "ctf/transform.hpp"

namespace ctf {

enum class Subcommand { kSweep, kInnovation, kExample, kValidate };

const char* subcommand_name(Subcommand s);
Subcommand subcommand_from_name(const std::string& name);

// Validated run configuration with defaults applied. The experiment grid
// defaults to log-uniform z1 spacing so desk-scale node counts resolve the
// narrow posteriors of the small-r regime.
struct RunConfig {
  Subcommand subcommand = Subcommand::kValidate;
  std::uint64_t seed = 42;
  int n_trials = 100;
  int n_members = 20000;
  int threads = 1;
  std::string out_dir = "out";

  std::vector<double> rho_list = {0.0, 0.3, 0.6, 0.9, 0.99};
  std::vector<double> r_list = {0.01, 0.1, 0.5, 2.0, 8.0};

  std::vector<double> y_list = {0.5, 1.0, 2.0, 4.0, 7.0, 12.0, 20.0};
  double innovation_rho = 0.99;
  double innovation_r = 0.01;
  int innovation_bins = 15;

  double example_rho = 0.99;
  double example_r = 0.05;
  double example_y = 0.5;

  Transform state_transform = default_state_transform();
  GridSpec grid = default_experiment_grid();

  static GridSpec default_experiment_grid();
};

// Parses and validates a JSON config file. Parse failures carry line and
// column information; validation failures name the offending field. Unknown
// keys are rejected.
RunConfig parse_config(const std::string& path);

// Same, from an in-memory document.
RunConfig parse_config_string(const std::string& text);

// JSON echo of a validated config (used for run metadata).
std::string config_to_json(const RunConfig& config);

}  // namespace ctf
