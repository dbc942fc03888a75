#pragma once

#include <functional>

#include <Eigen/Dense>

#include "ctf/ensemble.hpp"
#include "ctf/gaussian.hpp"
#include "ctf/random.hpp"
#include "ctf/transform.hpp"

namespace ctf {

// Physical-space observation operator h(x).
using ObsOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Draws one observation from p(y | z) at an extended physical member.
using LikelihoodSampler =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, RandomStream&)>;

// Stacks [x; h(x)] per member.
Ensemble extend_ensemble(const Ensemble& x_ens, const ObsOperator& h,
                         int obs_dim);

// Pulls the physical ensemble back with f^-1 and returns the latent ensemble
// together with its sample mean and (N-1)-normalized covariance. A member
// outside f's image domain raises a DomainError naming the member index.
std::pair<GaussianParams, Ensemble> fit_prior_latent(const Ensemble& z_ens,
                                                     const Transform& f);

// Column i ~ p(y | z^{f,i}); the result is a sample from the observation
// prior predictive.
ObsEnsemble generate_perturbed_obs(const Ensemble& z_ens,
                                   const LikelihoodSampler& sampler,
                                   RandomStream& rng);

// Stochastic latent-space update. The gain uses the sample covariances
//   Sigma H^T       = Cov(z_f, H z_f)
//   H Sigma H^T + R = Cov(y_f, y_f)
// so the latent observation-noise covariance is never estimated explicitly
// and no extra noise is drawn beyond the perturbed observation ensemble.
Ensemble latent_stochastic_update(const Ensemble& z_lat,
                                  const ObsEnsemble& y_lat,
                                  const Eigen::MatrixXd& H,
                                  const Eigen::VectorXd& y_obs_lat);

// Pushes the latent analysis ensemble back through f, nudging members off
// exact domain boundaries.
Ensemble back_transform(const Ensemble& z_lat_a, const Transform& f);

// Full pipeline: extend -> fit -> perturbed obs -> latent update with
// y_obs_lat = g^-1(y_obs) -> back-transform. Requires g to equal the
// observation part of f. Returns the extended physical analysis ensemble;
// callers strip the observation block.
Ensemble ectf_assimilate(const Ensemble& x_ens, const ObsOperator& h,
                         const Transform& f, const Transform& g,
                         const Eigen::VectorXd& y_obs,
                         const LikelihoodSampler& sampler, RandomStream& rng);

}  // namespace ctf
