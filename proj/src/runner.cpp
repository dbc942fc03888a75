#include "ctf/runner.hpp"

#include "ctf/csv.hpp"
#include "ctf/experiments.hpp"

namespace ctf {

RunOutcome run_config(const RunConfig& config) {
  RunOutcome outcome;
  switch (config.subcommand) {
    case Subcommand::kSweep: {
      const SweepResult result =
          sweep(config.rho_list, config.r_list, config.n_trials,
                config.n_members, config.grid, config.state_transform,
                config.seed, config.threads);
      outcome.paths = write_results(result, config);
      break;
    }
    case Subcommand::kInnovation: {
      const InnovationResult result = innovation_study(
          config.y_list, config.innovation_rho, config.innovation_r,
          config.n_trials, config.n_members, config.grid,
          config.state_transform, config.seed, config.threads,
          config.innovation_bins);
      outcome.paths = write_results(result, config);
      break;
    }
    case Subcommand::kExample: {
      const ExampleResult result =
          example_case(config.example_rho, config.example_r, config.example_y,
                       config.n_members, config.grid, config.state_transform,
                       config.seed);
      outcome.paths = write_results(result, config);
      break;
    }
    case Subcommand::kValidate: {
      outcome.checks = run_validation_suite();
      for (const CheckResult& check : outcome.checks) {
        if (!check.pass) outcome.ok = false;
      }
      break;
    }
  }
  return outcome;
}

}  // namespace ctf
