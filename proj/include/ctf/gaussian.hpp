#pragma once

#include <Eigen/Dense>

#include "ctf/ensemble.hpp"
#include "ctf/random.hpp"
#include "ctf/transform.hpp"

namespace ctf {

// Mean and covariance of a latent Gaussian.
struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

// Linear-Gaussian conditional map v | u ~ N(A u + b, Sigma_v).
struct LinearMap {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

// A latent Gaussian pushed through a transform; the physical-space density
// follows from the change-of-variables correction.
struct PushforwardDensity {
  Transform transform;
  GaussianParams base;
};

// 0.5 * (m + m^T).
Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m);

// Cholesky factor of a symmetric positive-definite matrix. A single failure
// triggers one diagonal jitter of 1e-12 * trace / D before refactoring; a
// second failure throws NumericalError.
Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& m,
                                       const char* what);

// ln phi(t^-1(x); mu, Sigma) + ln |det J_{t^-1}(x)|.
double pushforward_logpdf(const PushforwardDensity& d,
                          const Eigen::VectorXd& x);

// i.i.d. draws forward(t, mu + L xi) with L L^T = Sigma. Members landing
// exactly on an image-domain boundary in floating point are nudged one
// representable step inside.
Ensemble sample_pushforward(const PushforwardDensity& d, int n,
                            RandomStream& rng);

// Product part of the latent-Gaussian algebra:
//   Sigma_p = (Sigma_u^-1 + A^T Sigma_v^-1 A)^-1
//   mu_p    = Sigma_p [Sigma_u^-1 mu_u + A^T Sigma_v^-1 (v_tilde - b)]
// computed through the gain form B = Sigma_u A^T (Sigma_v + A Sigma_u A^T)^-1
// so every solve goes through a Cholesky factorization.
GaussianParams gaussian_product(const GaussianParams& u, const LinearMap& map,
                                const Eigen::MatrixXd& sigma_v,
                                const Eigen::VectorXd& v_tilde);

// Same quantity evaluated literally in precision form. Exists so the two
// algebraic routes can be cross-checked against each other.
GaussianParams gaussian_product_precision_form(const GaussianParams& u,
                                               const LinearMap& map,
                                               const Eigen::MatrixXd& sigma_v,
                                               const Eigen::VectorXd& v_tilde);

// Marginalization part: mu_i = A mu_u + b, Sigma_i = A Sigma_u A^T + Sigma_v.
GaussianParams gaussian_marginalize(const GaussianParams& u,
                                    const LinearMap& map,
                                    const Eigen::MatrixXd& sigma_v);

}  // namespace ctf
