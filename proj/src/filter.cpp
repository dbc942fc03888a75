#include "ctf/filter.hpp"

#include "ctf/error.hpp"

namespace ctf {

GaussianParams ctf_predict(const GaussianParams& post, const Eigen::MatrixXd& M,
                           const Eigen::MatrixXd& Q) {
  const int d = post.dim();
  if (M.rows() != d || M.cols() != d || Q.rows() != d || Q.cols() != d) {
    throw DimensionError("ctf_predict: nonconforming dimensions");
  }
  GaussianParams out;
  out.mean = M * post.mean;
  out.cov = symmetrized(M * post.cov * M.transpose() + Q);
  return out;
}

Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& prior_cov,
                            const Eigen::MatrixXd& H,
                            const Eigen::MatrixXd& R_cov) {
  const Eigen::Index d = prior_cov.rows();
  const Eigen::Index r = H.rows();
  if (prior_cov.cols() != d || H.cols() != d || R_cov.rows() != r ||
      R_cov.cols() != r) {
    throw DimensionError("kalman_gain: nonconforming dimensions");
  }
  const Eigen::MatrixXd innov =
      symmetrized(H * prior_cov * H.transpose() + R_cov);
  const auto llt = factor_spd(innov, "kalman_gain");
  // K = Sigma H^T innov^-1, via innov K^T = H Sigma.
  return llt.solve(H * prior_cov).transpose();
}

GaussianParams ctf_update(const GaussianParams& prior, const Eigen::MatrixXd& H,
                          const Eigen::MatrixXd& R_cov,
                          const Eigen::VectorXd& y_tilde) {
  if (y_tilde.size() != H.rows()) {
    throw DimensionError("ctf_update: observation dimension mismatch");
  }
  const Eigen::MatrixXd K = kalman_gain(prior.cov, H, R_cov);
  const int d = prior.dim();
  GaussianParams out;
  out.mean = prior.mean + K * (y_tilde - H * prior.mean);
  out.cov =
      symmetrized((Eigen::MatrixXd::Identity(d, d) - K * H) * prior.cov);
  return out;
}

FilterState ctf_filter_step(const FilterState& state, const LatentSSM& ssm,
                            const Eigen::VectorXd& y) {
  const Eigen::VectorXd y_tilde = ssm.g.inverse(y);
  FilterState next{state.transform,
                   ctf_update(ctf_predict(state.latent, ssm.M, ssm.Q), ssm.H,
                              ssm.R_cov, y_tilde),
                   state.k + 1};
  return next;
}

GaussianParams affine_pushforward(const GaussianParams& params,
                                  const Eigen::MatrixXd& L,
                                  const Eigen::VectorXd& b) {
  if (L.cols() != params.dim() || b.size() != L.rows()) {
    throw DimensionError("affine_pushforward: nonconforming dimensions");
  }
  GaussianParams out;
  out.mean = L * params.mean + b;
  out.cov = symmetrized(L * params.cov * L.transpose());
  return out;
}

}  // namespace ctf
