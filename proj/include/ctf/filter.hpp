#pragma once

#include <Eigen/Dense>

#include "ctf/gaussian.hpp"
#include "ctf/transform.hpp"

namespace ctf {

// Latent linear-Gaussian system corrected by the nonlinear state and
// observation maps f and g. In joint state-observation mode H selects the
// observation block and g must equal the observation part of f.
struct LatentSSM {
  Eigen::MatrixXd M;      // latent propagator, D x D
  Eigen::MatrixXd Q;      // latent model noise, D x D
  Eigen::MatrixXd H;      // latent observation matrix, R x D
  Eigen::MatrixXd R_cov;  // latent observation noise, R x R
  Transform f;            // state transform, dimension D
  Transform g;            // observation transform, dimension R
};

// The physical-space density is always PushforwardDensity(transform, latent);
// updates touch only the latent parameters, never the transform.
struct FilterState {
  Transform transform;
  GaussianParams latent;
  int k = 0;
};

// mu' = M mu, Sigma' = M Sigma M^T + Q.
GaussianParams ctf_predict(const GaussianParams& post, const Eigen::MatrixXd& M,
                           const Eigen::MatrixXd& Q);

// K = Sigma H^T (H Sigma H^T + R)^-1. R may be exactly zero when H Sigma H^T
// is positive definite on its own; otherwise the jitter policy applies.
Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& prior_cov,
                            const Eigen::MatrixXd& H,
                            const Eigen::MatrixXd& R_cov);

// mu' = mu + K(y_tilde - H mu), Sigma' = (I - K H) Sigma, symmetrized.
// y_tilde is the latent observation g^-1(y), computed by the caller.
GaussianParams ctf_update(const GaussianParams& prior, const Eigen::MatrixXd& H,
                          const Eigen::MatrixXd& R_cov,
                          const Eigen::VectorXd& y_tilde);

// One predict/update cycle on a physical observation y. The transform is
// carried over unchanged and the time index advances by one.
FilterState ctf_filter_step(const FilterState& state, const LatentSSM& ssm,
                            const Eigen::VectorXd& y);

// (L mu + b, L Sigma L^T): Gaussians are closed under affine maps.
GaussianParams affine_pushforward(const GaussianParams& params,
                                  const Eigen::MatrixXd& L,
                                  const Eigen::VectorXd& b);

}  // namespace ctf
