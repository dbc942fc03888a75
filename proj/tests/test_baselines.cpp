#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ctf/baselines.hpp"
#include "ctf/error.hpp"
#include "ctf/filter.hpp"
#include "ctf/gaussian.hpp"
#include "ctf/random.hpp"
#include "ctf/stats.hpp"

using ctf::Ensemble;
using ctf::GaussianParams;
using ctf::lr_regress_increments;
using ctf::MarginalCdf;
using ctf::qcef_obs_update;
using ctf::Space;
using ctf::Transform;

namespace {

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

const ctf::ObsOperator select_first = [](const Eigen::VectorXd& x) {
  return Eigen::VectorXd::Constant(1, x(0));
};

}  // namespace

TEST_CASE("enkf matches the exact Kalman posterior on a linear toy") {
  ctf::RandomStream rng(111);
  GaussianParams prior;
  prior.mean = Eigen::Vector2d(0.5, -0.3);
  prior.cov.resize(2, 2);
  prior.cov << 1.0, 0.4, 0.4, 0.8;
  const int n = 200000;
  Ensemble ens;
  ens.space = Space::kPhysical;
  ens.members.resize(2, n);
  const Eigen::MatrixXd L = prior.cov.llt().matrixL();
  for (int j = 0; j < n; ++j) {
    ens.members.col(j) = prior.mean + L * rng.normal_vector(2);
  }
  const double r = 0.3;
  const ctf::LikelihoodSampler sampler =
      [r](const Eigen::VectorXd& member, ctf::RandomStream& rs) {
        return Eigen::VectorXd::Constant(
            1, member(member.size() - 1) + std::sqrt(r) * rs.normal());
      };
  const Eigen::VectorXd y = vec1(1.2);
  const Ensemble ext = enkf_assimilate(ens, select_first, y, sampler, rng);
  const Eigen::MatrixXd analysis = ext.members.topRows(2);

  Eigen::MatrixXd H(1, 2);
  H << 1.0, 0.0;
  const GaussianParams exact =
      ctf::ctf_update(prior, H, Eigen::MatrixXd::Constant(1, 1, r), y);
  const Eigen::VectorXd mean = analysis.rowwise().mean();
  const Eigen::MatrixXd cov = ctf::sample_cov(analysis, analysis);
  const double tol = 5.0 / std::sqrt(static_cast<double>(n));
  CHECK((mean - exact.mean).norm() / exact.mean.norm() < tol);
  CHECK((cov - exact.cov).norm() / exact.cov.norm() < tol);
}

TEST_CASE("enkf pushes members out of bounds on the bounded problem") {
  ctf::RandomStream rng(121);
  GaussianParams base;
  base.mean = Eigen::Vector2d(0.0, 0.0);
  base.cov.resize(2, 2);
  const double rho = 0.99, s1 = 1.0, s2 = 1.0;
  base.cov << s1, rho * std::sqrt(s1 * s2), rho * std::sqrt(s1 * s2), s2;
  const Transform state_f =
      Transform::partition(Transform::exp(1), Transform::logistic(1));
  const int n = 20000;
  const Ensemble prior =
      sample_pushforward(ctf::PushforwardDensity{state_f, base}, n, rng);

  const double r = 0.05;
  const ctf::LikelihoodSampler sampler =
      [r](const Eigen::VectorXd& member, ctf::RandomStream& rs) {
        return Eigen::VectorXd::Constant(
            1, member(member.size() - 1) * std::exp(std::sqrt(r) * rs.normal()));
      };
  const Ensemble ext =
      enkf_assimilate(prior, select_first, vec1(0.5), sampler, rng);
  long violations = 0;
  for (int j = 0; j < ext.size(); ++j) {
    const double z1 = ext.members(0, j);
    const double z2 = ext.members(1, j);
    if (!(z1 > 0.0) || !(z2 > 0.0) || !(z2 < 1.0)) ++violations;
  }
  const double pct = 100.0 * static_cast<double>(violations) / n;
  CHECK(pct > 3.0);
}

TEST_CASE("zero-spread prior gives zero gain") {
  Ensemble ens;
  ens.space = Space::kPhysical;
  ens.members = Eigen::MatrixXd::Ones(2, 100);
  ctf::RandomStream rng(131);
  const ctf::LikelihoodSampler sampler =
      [](const Eigen::VectorXd& member, ctf::RandomStream& rs) {
        return Eigen::VectorXd::Constant(
            1, member(member.size() - 1) + rs.normal());
      };
  const Ensemble ext =
      enkf_assimilate(ens, select_first, vec1(5.0), sampler, rng);
  CHECK((ext.members.topRows(2).array() == 1.0).all());
}

TEST_CASE("quantile matching update") {
  const MarginalCdf prior = MarginalCdf::lognormal(0.0, 1.0);

  // Identical cdfs: the map is the identity.
  const std::vector<double> members = {0.2, 0.7, 1.0, 2.5, 9.0};
  const std::vector<double> same = qcef_obs_update(members, prior, prior);
  for (std::size_t i = 0; i < members.size(); ++i) {
    CHECK(same[i] == doctest::Approx(members[i]).epsilon(1e-9));
  }

  // LN(0,1) -> LN(1,1) is multiplication by e.
  const MarginalCdf post = MarginalCdf::lognormal(1.0, 1.0);
  const std::vector<double> scaled = qcef_obs_update(members, prior, post);
  for (std::size_t i = 0; i < members.size(); ++i) {
    CHECK(scaled[i] ==
          doctest::Approx(std::exp(1.0) * members[i]).epsilon(1e-9));
  }

  // The prior median maps to the posterior median.
  const MarginalCdf post2 = MarginalCdf::lognormal(0.7, 0.3);
  const std::vector<double> med = qcef_obs_update({1.0}, prior, post2);
  CHECK(med[0] == doctest::Approx(std::exp(0.7)).epsilon(1e-9));
}

TEST_CASE("quantile matching preserves member order exactly") {
  ctf::RandomStream rng(141);
  std::vector<double> members(2000);
  for (double& m : members) m = std::exp(rng.normal());
  const MarginalCdf prior = MarginalCdf::lognormal(0.0, 1.0);
  const MarginalCdf post = MarginalCdf::lognormal(-0.4, 0.5);
  const std::vector<double> updated = qcef_obs_update(members, prior, post);
  std::vector<std::size_t> order(members.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto by_member = order, by_updated = order;
  std::sort(by_member.begin(), by_member.end(),
            [&](std::size_t a, std::size_t b) { return members[a] < members[b]; });
  std::sort(by_updated.begin(), by_updated.end(),
            [&](std::size_t a, std::size_t b) { return updated[a] < updated[b]; });
  CHECK(by_member == by_updated);
}

TEST_CASE("numeric cdf inversion") {
  const MarginalCdf numeric = MarginalCdf::numeric(
      [](double x) { return ctf::stats::normal_cdf(x); }, -10.0, 10.0);
  CHECK(numeric.inv(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(numeric.inv(numeric.cdf(1.3)) == doctest::Approx(1.3).epsilon(1e-9));
}

TEST_CASE("linear regression of increments") {
  // Cov/Var = 0.5 with increments of 2 gives state increments of 1.
  const std::vector<double> obs = {0.0, 2.0};
  const std::vector<double> state = {0.0, 1.0};
  const std::vector<double> inc = {2.0, 2.0};
  const std::vector<double> out = lr_regress_increments(state, obs, inc);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(1.0));

  // Uncorrelated rows give zero increments.
  const std::vector<double> flat = {1.0, 1.0};
  CHECK_THROWS_AS(lr_regress_increments(state, flat, inc),
                  ctf::NumericalError);
  const std::vector<double> anti = {0.0, 1.0, 0.0, 1.0};
  const std::vector<double> uncorr = {0.0, 0.0, 1.0, 1.0};
  const std::vector<double> inc4 = {1.0, 1.0, 1.0, 1.0};
  const std::vector<double> zero = lr_regress_increments(anti, uncorr, inc4);
  for (double v : zero) CHECK(v == doctest::Approx(0.0));

  // State identical to observations: unit regression.
  const std::vector<double> unit = lr_regress_increments(obs, obs, inc);
  CHECK(unit[0] == doctest::Approx(2.0));
  CHECK(unit[1] == doctest::Approx(2.0));
}

TEST_CASE("regression is linear in the increment vector") {
  ctf::RandomStream rng(151);
  const int n = 50;
  std::vector<double> state(n), obs(n), inc_a(n), inc_b(n);
  for (int i = 0; i < n; ++i) {
    state[i] = rng.normal();
    obs[i] = rng.normal();
    inc_a[i] = rng.normal();
    inc_b[i] = rng.normal();
  }
  const auto a = lr_regress_increments(state, obs, inc_a);
  const auto b = lr_regress_increments(state, obs, inc_b);
  std::vector<double> combined(n);
  for (int i = 0; i < n; ++i) combined[i] = 2.5 * inc_a[i] + inc_b[i];
  const auto c = lr_regress_increments(state, obs, combined);
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(c[i] - (2.5 * a[i] + b[i])) < 1e-12);
  }
}

TEST_CASE("qcef-lr: exact observation-space marginal") {
  ctf::RandomStream rng(161);
  GaussianParams latent;
  latent.mean = Eigen::Vector2d(0.2, -0.5);
  latent.cov.resize(2, 2);
  const double rho = 0.6, s1 = 0.9, s2 = 1.2;
  latent.cov << s1, rho * std::sqrt(s1 * s2), rho * std::sqrt(s1 * s2), s2;
  const Transform state_f =
      Transform::partition(Transform::exp(1), Transform::logistic(1));
  const int n = 50000;
  const Ensemble prior =
      sample_pushforward(ctf::PushforwardDensity{state_f, latent}, n, rng);

  const double r = 0.2, y = 1.4;
  const Ensemble analysis =
      qcef_lr_assimilate(prior, ctf::QcefTrialContext{latent, r, y});

  // True posterior z1 marginal: conjugate lognormal.
  const double var1 = latent.cov(0, 0);
  const double post_var = 1.0 / (1.0 / var1 + 1.0 / r);
  const double post_mean =
      post_var * (latent.mean(0) / var1 + std::log(y) / r);
  std::vector<double> z1(n);
  for (int i = 0; i < n; ++i) z1[i] = analysis.members(0, i);
  std::sort(z1.begin(), z1.end());
  std::vector<double> cdf(n);
  for (int i = 0; i < n; ++i) {
    cdf[i] = ctf::stats::normal_cdf((std::log(z1[i]) - post_mean) /
                                    std::sqrt(post_var));
  }
  CHECK(ctf::stats::ks_statistic(cdf) <
        ctf::stats::ks_critical_value(n, 0.01));
}

TEST_CASE("qcef-lr with independent coordinates leaves z2 nearly untouched") {
  ctf::RandomStream rng(171);
  GaussianParams latent;
  latent.mean = Eigen::Vector2d(0.1, 0.3);
  latent.cov.resize(2, 2);
  latent.cov << 1.0, 0.0, 0.0, 0.8;
  const Transform state_f =
      Transform::partition(Transform::exp(1), Transform::logistic(1));
  const int n = 20000;
  const Ensemble prior =
      sample_pushforward(ctf::PushforwardDensity{state_f, latent}, n, rng);

  const Ensemble analysis =
      qcef_lr_assimilate(prior, ctf::QcefTrialContext{latent, 0.1, 0.6});
  const Eigen::ArrayXd increments =
      (analysis.members.row(1) - prior.members.row(1)).array();
  const double prior_sd = std::sqrt(
      ctf::sample_cov(prior.members.bottomRows(1), prior.members.bottomRows(1))(
          0, 0));
  // Sampling noise only: increments are a vanishing fraction of the spread.
  CHECK(std::sqrt((increments * increments).mean()) < 0.05 * prior_sd);
  // The observed coordinate is still updated exactly.
  CHECK((analysis.members.row(0) - prior.members.row(0)).cwiseAbs().maxCoeff() >
        0.0);
}

TEST_CASE("qcef-lr does not clip the unobserved coordinate") {
  // A strongly correlated prior with a large innovation produces increments
  // that push z2 outside (0,1); they must remain unclipped.
  ctf::RandomStream rng(181);
  GaussianParams latent;
  latent.mean = Eigen::Vector2d(0.0, 0.0);
  latent.cov.resize(2, 2);
  const double rho = 0.99;
  latent.cov << 1.0, rho, rho, 1.0;
  const Transform state_f =
      Transform::partition(Transform::exp(1), Transform::logistic(1));
  const Ensemble prior =
      sample_pushforward(ctf::PushforwardDensity{state_f, latent}, 20000, rng);
  const Ensemble analysis =
      qcef_lr_assimilate(prior, ctf::QcefTrialContext{latent, 0.01, 12.0});
  CHECK((analysis.members.row(1).array() >= 1.0).any());
}
