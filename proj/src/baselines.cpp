#include "ctf/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "ctf/error.hpp"
#include "ctf/filter.hpp"
#include "ctf/stats.hpp"

namespace ctf {

MarginalCdf MarginalCdf::lognormal(double latent_mean, double latent_var) {
  if (!(latent_var > 0.0)) {
    throw NumericalError("MarginalCdf::lognormal: variance must be positive");
  }
  MarginalCdf m;
  m.is_lognormal_ = true;
  m.latent_mean_ = latent_mean;
  m.latent_sd_ = std::sqrt(latent_var);
  return m;
}

MarginalCdf MarginalCdf::numeric(std::function<double(double)> cdf, double lo,
                                 double hi) {
  if (!(lo < hi)) throw NumericalError("MarginalCdf::numeric: empty support");
  MarginalCdf m;
  m.numeric_cdf_ = std::move(cdf);
  m.lo_ = lo;
  m.hi_ = hi;
  return m;
}

double MarginalCdf::cdf(double x) const {
  if (is_lognormal_) {
    if (x <= 0.0) return 0.0;
    return stats::normal_cdf((std::log(x) - latent_mean_) / latent_sd_);
  }
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  return numeric_cdf_(x);
}

double MarginalCdf::inv(double p) const {
  // Probabilities squeezed against 0 or 1 by floating point are pulled one
  // step in; the quantile stays finite.
  p = std::min(std::max(p, 1e-300), 1.0 - 1.1e-16);
  if (is_lognormal_) {
    return std::exp(latent_mean_ + latent_sd_ * stats::inv_normal_cdf(p));
  }
  double lo = lo_;
  double hi = hi_;
  double flo = cdf(lo) - p;
  double fhi = cdf(hi) - p;
  if (flo > 0.0 || fhi < 0.0) {
    throw NumericalError("MarginalCdf::inv: bracket not found");
  }
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-14 * (1.0 + std::abs(lo));
       ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) - p <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Ensemble enkf_assimilate(const Ensemble& x_ens, const ObsOperator& h,
                         const Eigen::VectorXd& y_obs,
                         const LikelihoodSampler& sampler, RandomStream& rng) {
  const int obs_dim = static_cast<int>(y_obs.size());
  const Transform f = Transform::partition(Transform::identity(x_ens.dim()),
                                           Transform::identity(obs_dim));
  return ectf_assimilate(x_ens, h, f, Transform::identity(obs_dim), y_obs,
                         sampler, rng);
}

std::vector<double> qcef_obs_update(const std::vector<double>& obs_members,
                                    const MarginalCdf& prior_cdf,
                                    const MarginalCdf& post_cdf) {
  std::vector<double> out(obs_members.size());
  for (std::size_t i = 0; i < obs_members.size(); ++i) {
    out[i] = post_cdf.inv(prior_cdf.cdf(obs_members[i]));
  }
  return out;
}

std::vector<double> lr_regress_increments(
    const std::vector<double>& state_row, const std::vector<double>& obs_row,
    const std::vector<double>& obs_increments) {
  const std::size_t n = state_row.size();
  if (obs_row.size() != n || obs_increments.size() != n) {
    throw DimensionError("lr_regress_increments: rows must have equal length");
  }
  if (n < 2) throw DimensionError("lr_regress_increments: need >= 2 members");
  double mean_s = 0.0, mean_o = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_s += state_row[i];
    mean_o += obs_row[i];
  }
  mean_s /= static_cast<double>(n);
  mean_o /= static_cast<double>(n);
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (state_row[i] - mean_s) * (obs_row[i] - mean_o);
    var += (obs_row[i] - mean_o) * (obs_row[i] - mean_o);
  }
  cov /= static_cast<double>(n - 1);
  var /= static_cast<double>(n - 1);
  if (!(var > 0.0)) {
    throw NumericalError("lr_regress_increments: zero observation variance");
  }
  const double slope = cov / var;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = slope * obs_increments[i];
  return out;
}

Ensemble qcef_lr_assimilate(const Ensemble& x_ens,
                            const QcefTrialContext& ctx) {
  if (x_ens.dim() != 2) {
    throw DimensionError("qcef_lr_assimilate: expected a 2-variable ensemble");
  }
  if (ctx.prior_latent.dim() != 2) {
    throw DimensionError("qcef_lr_assimilate: prior must be 2-dimensional");
  }
  const int n = x_ens.size();

  const double mu1 = ctx.prior_latent.mean(0);
  const double var1 = ctx.prior_latent.cov(0, 0);
  const MarginalCdf prior_cdf = MarginalCdf::lognormal(mu1, var1);

  // Conjugate latent update of the observed coordinate: the posterior
  // marginal of z1 is again lognormal.
  GaussianParams obs_prior;
  obs_prior.mean = Eigen::VectorXd::Constant(1, mu1);
  obs_prior.cov = Eigen::MatrixXd::Constant(1, 1, var1);
  const GaussianParams obs_post =
      ctf_update(obs_prior, Eigen::MatrixXd::Identity(1, 1),
                 Eigen::MatrixXd::Constant(1, 1, ctx.r),
                 Eigen::VectorXd::Constant(1, std::log(ctx.y)));
  const MarginalCdf post_cdf =
      MarginalCdf::lognormal(obs_post.mean(0), obs_post.cov(0, 0));

  std::vector<double> obs_row(n), state_row(n);
  for (int j = 0; j < n; ++j) {
    obs_row[j] = x_ens.members(0, j);
    state_row[j] = x_ens.members(1, j);
  }
  const std::vector<double> obs_updated =
      qcef_obs_update(obs_row, prior_cdf, post_cdf);
  std::vector<double> obs_increments(n);
  for (int j = 0; j < n; ++j) obs_increments[j] = obs_updated[j] - obs_row[j];
  const std::vector<double> state_increments =
      lr_regress_increments(state_row, obs_row, obs_increments);

  Ensemble out;
  out.space = Space::kPhysical;
  out.members.resize(2, n);
  for (int j = 0; j < n; ++j) {
    out.members(0, j) = obs_updated[j];
    out.members(1, j) = state_row[j] + state_increments[j];
  }
  return out;
}

}  // namespace ctf
