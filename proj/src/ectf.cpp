#include "ctf/ectf.hpp"

#include <string>

#include "ctf/error.hpp"
#include "ctf/gaussian.hpp"

namespace ctf {

Ensemble extend_ensemble(const Ensemble& x_ens, const ObsOperator& h,
                         int obs_dim) {
  if (x_ens.space != Space::kPhysical) {
    throw Error("extend_ensemble: expected a physical-space ensemble");
  }
  const int d = x_ens.dim();
  const int n = x_ens.size();
  Ensemble out;
  out.space = Space::kPhysical;
  out.members.resize(d + obs_dim, n);
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd x = x_ens.members.col(j);
    const Eigen::VectorXd hx = h(x);
    if (hx.size() != obs_dim) {
      throw DimensionError("extend_ensemble: observation operator output size");
    }
    out.members.col(j).head(d) = x;
    out.members.col(j).tail(obs_dim) = hx;
  }
  return out;
}

std::pair<GaussianParams, Ensemble> fit_prior_latent(const Ensemble& z_ens,
                                                     const Transform& f) {
  if (z_ens.space != Space::kPhysical) {
    throw Error("fit_prior_latent: expected a physical-space ensemble");
  }
  const int d = z_ens.dim();
  const int n = z_ens.size();
  if (f.dim() != d) {
    throw DimensionError("fit_prior_latent: transform dimension mismatch");
  }
  if (n < 2) throw DimensionError("fit_prior_latent: need at least 2 members");

  Ensemble latent;
  latent.space = Space::kLatent;
  latent.members.resize(d, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < d; ++i) {
      try {
        latent.members(i, j) = f.inverse_coord(i, z_ens.members(i, j));
      } catch (const DomainError& e) {
        throw DomainError("fit_prior_latent: member " + std::to_string(j) +
                          ": " + e.what());
      }
    }
  }
  GaussianParams fitted;
  fitted.mean = latent.members.rowwise().mean();
  fitted.cov = sample_cov(latent.members, latent.members);
  return {std::move(fitted), std::move(latent)};
}

ObsEnsemble generate_perturbed_obs(const Ensemble& z_ens,
                                   const LikelihoodSampler& sampler,
                                   RandomStream& rng) {
  if (z_ens.space != Space::kPhysical) {
    throw Error("generate_perturbed_obs: expected a physical-space ensemble");
  }
  const int n = z_ens.size();
  ObsEnsemble out;
  out.space = Space::kPhysical;
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd y = sampler(z_ens.members.col(j), rng);
    if (j == 0) out.values.resize(y.size(), n);
    if (y.size() != out.values.rows()) {
      throw DimensionError("generate_perturbed_obs: sampler output size");
    }
    out.values.col(j) = y;
  }
  return out;
}

Ensemble latent_stochastic_update(const Ensemble& z_lat,
                                  const ObsEnsemble& y_lat,
                                  const Eigen::MatrixXd& H,
                                  const Eigen::VectorXd& y_obs_lat) {
  if (z_lat.space != Space::kLatent || y_lat.space != Space::kLatent) {
    throw Error("latent_stochastic_update: expected latent-space inputs");
  }
  if (z_lat.size() != y_lat.size()) {
    throw DimensionError("latent_stochastic_update: ensemble sizes differ");
  }
  if (H.cols() != z_lat.dim() || H.rows() != y_lat.dim() ||
      y_obs_lat.size() != y_lat.dim()) {
    throw DimensionError("latent_stochastic_update: nonconforming dimensions");
  }
  const Eigen::MatrixXd hz = H * z_lat.members;
  const Eigen::MatrixXd cross = sample_cov(z_lat.members, hz);
  const Eigen::MatrixXd innov =
      symmetrized(sample_cov(y_lat.values, y_lat.values));
  const auto llt = factor_spd(innov, "latent_stochastic_update");
  const Eigen::MatrixXd gain = llt.solve(cross.transpose()).transpose();

  Ensemble out;
  out.space = Space::kLatent;
  out.members = z_lat.members + gain * ((-y_lat.values).colwise() + y_obs_lat);
  return out;
}

Ensemble back_transform(const Ensemble& z_lat_a, const Transform& f) {
  if (z_lat_a.space != Space::kLatent) {
    throw Error("back_transform: expected a latent-space ensemble");
  }
  if (f.dim() != z_lat_a.dim()) {
    throw DimensionError("back_transform: transform dimension mismatch");
  }
  const int d = z_lat_a.dim();
  const int n = z_lat_a.size();
  Ensemble out;
  out.space = Space::kPhysical;
  out.members.resize(d, n);
  for (int i = 0; i < d; ++i) {
    const CoordInterval dom = f.domain(i);
    for (int j = 0; j < n; ++j) {
      out.members(i, j) = dom.nudge_inside(f.forward_coord(i, z_lat_a.members(i, j)));
    }
  }
  return out;
}

Ensemble ectf_assimilate(const Ensemble& x_ens, const ObsOperator& h,
                         const Transform& f, const Transform& g,
                         const Eigen::VectorXd& y_obs,
                         const LikelihoodSampler& sampler, RandomStream& rng) {
  if (f.kind() != TransformKind::kPartition || f.obs_part() != g) {
    throw Error(
        "ectf_assimilate: g must equal the observation part of the "
        "partitioned f");
  }
  const int obs_dim = g.dim();
  const Ensemble z_ens = extend_ensemble(x_ens, h, obs_dim);
  auto [fitted, z_lat] = fit_prior_latent(z_ens, f);
  (void)fitted;  // the update consumes sample covariances directly

  ObsEnsemble y_phys = generate_perturbed_obs(z_ens, sampler, rng);
  ObsEnsemble y_lat;
  y_lat.space = Space::kLatent;
  y_lat.values.resize(obs_dim, y_phys.size());
  for (int j = 0; j < y_phys.size(); ++j) {
    y_lat.values.col(j) = g.inverse(y_phys.values.col(j));
  }

  Eigen::MatrixXd H =
      Eigen::MatrixXd::Zero(obs_dim, f.dim());
  H.rightCols(obs_dim).setIdentity();

  const Eigen::VectorXd y_obs_lat = g.inverse(y_obs);
  const Ensemble z_lat_a =
      latent_stochastic_update(z_lat, y_lat, H, y_obs_lat);
  return back_transform(z_lat_a, f);
}

}  // namespace ctf
