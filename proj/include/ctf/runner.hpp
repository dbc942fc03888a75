#pragma once

#include <string>
#include <vector>

#include "ctf/config.hpp"
#include "ctf/validate.hpp"

namespace ctf {

struct RunOutcome {
  std::vector<std::string> paths;    // files written by the study
  std::vector<CheckResult> checks;   // populated by the validate subcommand
  bool ok = true;                    // false iff a validation check failed
};

// Executes a validated configuration end to end: runs the selected study,
// writes its CSV and SVG outputs, or runs the validation suite.
RunOutcome run_config(const RunConfig& config);

}  // namespace ctf
