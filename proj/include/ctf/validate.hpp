#pragma once

#include <string>
#include <vector>

namespace ctf {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Runs the library's cross-cutting invariants: transform round trips and
// Jacobian checks, the two algebraic routes of the latent-Gaussian product,
// quadrature cross-checks, Kalman-filter equivalence under identity
// transforms, the observation-consistency limit, and the identity reduction
// of the ensemble filters.
std::vector<CheckResult> run_validation_suite();

}  // namespace ctf
