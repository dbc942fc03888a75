#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ctf/ectf.hpp"
#include "ctf/ensemble.hpp"
#include "ctf/gaussian.hpp"

namespace ctf {

// Marginal cumulative distribution function: either a lognormal with known
// latent parameters or a generic numeric cdf inverted by bisection.
class MarginalCdf {
 public:
  static MarginalCdf lognormal(double latent_mean, double latent_var);
  static MarginalCdf numeric(std::function<double(double)> cdf, double lo,
                             double hi);

  double cdf(double x) const;
  double inv(double p) const;

 private:
  MarginalCdf() = default;
  bool is_lognormal_ = false;
  double latent_mean_ = 0.0;
  double latent_sd_ = 1.0;
  std::function<double(double)> numeric_cdf_;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

// Stochastic EnKF: the ECTF pipeline with identity state and observation
// transforms, so physical-space perturbed observations are used directly.
// Returns the extended physical analysis ensemble.
Ensemble enkf_assimilate(const Ensemble& x_ens, const ObsOperator& h,
                         const Eigen::VectorXd& y_obs,
                         const LikelihoodSampler& sampler, RandomStream& rng);

// Quantile-matching update x -> F_post^-1(F_prior(x)) of observation-space
// members.
std::vector<double> qcef_obs_update(const std::vector<double>& obs_members,
                                    const MarginalCdf& prior_cdf,
                                    const MarginalCdf& post_cdf);

// Linear regression of observation-space increments onto a state variable:
// delta_state_i = Cov(state, obs) / Var(obs) * delta_obs_i, sample statistics
// with the (N-1) divisor.
std::vector<double> lr_regress_increments(
    const std::vector<double>& state_row, const std::vector<double>& obs_row,
    const std::vector<double>& obs_increments);

// Problem description for the two-variable setup: a latent-Gaussian prior
// pushed through (exp, .) with the first coordinate observed through a
// lognormal likelihood of latent variance r.
struct QcefTrialContext {
  GaussianParams prior_latent;  // 2-dimensional
  double r = 0.0;
  double y = 0.0;
};

// Two-step update: exact quantile matching of the observed coordinate using
// the conjugate latent update for the posterior cdf, then linear regression
// of the increments onto the unobserved coordinate. The unobserved members
// are not clipped to their physical bounds.
Ensemble qcef_lr_assimilate(const Ensemble& x_ens, const QcefTrialContext& ctx);

}  // namespace ctf
