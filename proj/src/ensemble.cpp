#include "ctf/ensemble.hpp"

#include "ctf/error.hpp"

namespace ctf {

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("sample_cov: ensembles must have equal size");
  }
  const Eigen::Index n = a.cols();
  if (n < 2) throw DimensionError("sample_cov: need at least 2 members");
  const Eigen::VectorXd mean_a = a.rowwise().mean();
  const Eigen::VectorXd mean_b = b.rowwise().mean();
  const Eigen::MatrixXd ca = a.colwise() - mean_a;
  const Eigen::MatrixXd cb = b.colwise() - mean_b;
  return (ca * cb.transpose()) / static_cast<double>(n - 1);
}

}  // namespace ctf
