#pragma once

#include <Eigen/Dense>

namespace ctf {

enum class Space { kPhysical, kLatent };

// Columns are members.
struct Ensemble {
  Eigen::MatrixXd members;  // D x N
  Space space = Space::kPhysical;

  int dim() const { return static_cast<int>(members.rows()); }
  int size() const { return static_cast<int>(members.cols()); }
};

struct ObsEnsemble {
  Eigen::MatrixXd values;  // R x N
  Space space = Space::kPhysical;

  int dim() const { return static_cast<int>(values.rows()); }
  int size() const { return static_cast<int>(values.cols()); }
};

// Cross-covariance of two equally sized ensembles with the (N-1) divisor.
Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

inline Eigen::MatrixXd sample_cov(const Ensemble& a, const Ensemble& b) {
  return sample_cov(a.members, b.members);
}

}  // namespace ctf
