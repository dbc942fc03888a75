#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ctf/baselines.hpp"
#include "ctf/ectf.hpp"
#include "ctf/error.hpp"
#include "ctf/filter.hpp"
#include "ctf/gaussian.hpp"
#include "ctf/oracle.hpp"
#include "ctf/random.hpp"

using ctf::Ensemble;
using ctf::GaussianParams;
using ctf::ObsEnsemble;
using ctf::Space;
using ctf::Transform;

namespace {

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

Ensemble make_ensemble(std::initializer_list<std::initializer_list<double>> rows,
                       Space space) {
  const int d = static_cast<int>(rows.size());
  const int n = static_cast<int>(rows.begin()->size());
  Ensemble e;
  e.space = space;
  e.members.resize(d, n);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) e.members(i, j++) = v;
    ++i;
  }
  return e;
}

const ctf::ObsOperator select_first = [](const Eigen::VectorXd& x) {
  return Eigen::VectorXd::Constant(1, x(0));
};

}  // namespace

TEST_CASE("extend_ensemble examples") {
  const Ensemble x = make_ensemble({{1.0}, {2.0}}, Space::kPhysical);
  const Ensemble z = extend_ensemble(x, select_first, 1);
  CHECK(z.dim() == 3);
  CHECK(z.size() == 1);
  CHECK(z.members(0, 0) == 1.0);
  CHECK(z.members(1, 0) == 2.0);
  CHECK(z.members(2, 0) == 1.0);

  const ctf::ObsOperator full = [](const Eigen::VectorXd& x_) { return x_; };
  const Ensemble dup = extend_ensemble(x, full, 2);
  CHECK(dup.dim() == 4);
  CHECK(dup.members.col(0).head(2) == dup.members.col(0).tail(2));

  Ensemble many = make_ensemble({{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}},
                                Space::kPhysical);
  CHECK(extend_ensemble(many, select_first, 1).size() == 3);

  const ctf::ObsOperator bad = [](const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(2);
  };
  CHECK_THROWS_AS(extend_ensemble(x, bad, 1), ctf::DimensionError);
}

TEST_CASE("fit_prior_latent examples") {
  const Ensemble ident = make_ensemble({{0.0, 2.0}}, Space::kPhysical);
  const auto [p1, lat1] = fit_prior_latent(ident, Transform::identity(1));
  CHECK(p1.mean(0) == doctest::Approx(1.0));
  CHECK(p1.cov(0, 0) == doctest::Approx(2.0));  // (N-1) divisor
  CHECK(lat1.space == Space::kLatent);

  const Ensemble expo =
      make_ensemble({{1.0, std::exp(2.0)}}, Space::kPhysical);
  const auto [p2, lat2] = fit_prior_latent(expo, Transform::exp(1));
  CHECK(p2.mean(0) == doctest::Approx(1.0));
  CHECK(p2.cov(0, 0) == doctest::Approx(2.0));
  CHECK(lat2.members(0, 0) == doctest::Approx(0.0));
  CHECK(lat2.members(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("fit_prior_latent recovers the generating parameters at large N") {
  ctf::RandomStream rng(31);
  GaussianParams base;
  base.mean = Eigen::Vector2d(0.3, -0.6);
  base.cov.resize(2, 2);
  base.cov << 1.2, 0.5, 0.5, 0.8;
  const Transform f =
      Transform::partition(Transform::exp(1), Transform::logistic(1));
  const int n = 100000;
  const Ensemble ens =
      sample_pushforward(ctf::PushforwardDensity{f, base}, n, rng);
  const auto [fitted, latent] = fit_prior_latent(ens, f);
  const double tol = 5.0 / std::sqrt(static_cast<double>(n));
  CHECK((fitted.mean - base.mean).norm() / base.mean.norm() < tol);
  CHECK((fitted.cov - base.cov).norm() / base.cov.norm() < tol);
}

TEST_CASE("fit_prior_latent names the offending member") {
  Ensemble bad = make_ensemble({{1.0, -2.0, 3.0}}, Space::kPhysical);
  try {
    fit_prior_latent(bad, Transform::exp(1));
    FAIL("expected a domain error");
  } catch (const ctf::DomainError& e) {
    CHECK(std::string(e.what()).find("member 1") != std::string::npos);
  }
}

TEST_CASE("sample_cov examples") {
  Eigen::MatrixXd a(1, 2);
  a << 0.0, 2.0;
  CHECK(ctf::sample_cov(a, a)(0, 0) == doctest::Approx(2.0));

  Eigen::MatrixXd constant(1, 2);
  constant << 3.0, 3.0;
  CHECK(ctf::sample_cov(a, constant).norm() == doctest::Approx(0.0));

  Eigen::MatrixXd paired(2, 2);
  paired << 0.0, 2.0, 0.0, 2.0;
  const Eigen::MatrixXd c = ctf::sample_cov(paired, paired);
  CHECK(c.minCoeff() == doctest::Approx(2.0));
  CHECK(c.maxCoeff() == doctest::Approx(2.0));

  Eigen::MatrixXd single(1, 1);
  single << 1.0;
  CHECK_THROWS_AS(ctf::sample_cov(single, single), ctf::DimensionError);
}

TEST_CASE("generate_perturbed_obs") {
  ctf::RandomStream rng(41);
  const Ensemble z = make_ensemble({{1.0, 2.0, 3.0}, {0.5, 0.5, 0.5},
                                    {1.0, 2.0, 3.0}},
                                   Space::kPhysical);

  // Degenerate likelihood reproduces h(z) exactly.
  const ctf::LikelihoodSampler degenerate =
      [](const Eigen::VectorXd& member, ctf::RandomStream&) {
        return Eigen::VectorXd::Constant(1, member(member.size() - 1));
      };
  const ObsEnsemble exact = generate_perturbed_obs(z, degenerate, rng);
  CHECK(exact.values(0, 0) == 1.0);
  CHECK(exact.values(0, 1) == 2.0);
  CHECK(exact.values(0, 2) == 3.0);
  CHECK(exact.size() == 3);

  // Lognormal likelihood at z1 = 1: draws follow LN(0, r).
  const double r = 0.25;
  const ctf::LikelihoodSampler lognormal =
      [r](const Eigen::VectorXd& member, ctf::RandomStream& rs) {
        return Eigen::VectorXd::Constant(
            1, member(member.size() - 1) * std::exp(std::sqrt(r) * rs.normal()));
      };
  Ensemble unit;
  unit.space = Space::kPhysical;
  unit.members = Eigen::MatrixXd::Ones(3, 50000);
  const ObsEnsemble draws = generate_perturbed_obs(unit, lognormal, rng);
  const double log_mean = draws.values.array().log().mean();
  const double log_var =
      (draws.values.array().log() - log_mean).square().sum() /
      (draws.size() - 1);
  CHECK(std::abs(log_mean) < 4.0 * std::sqrt(r / draws.size()));
  CHECK(log_var == doctest::Approx(r).epsilon(0.05));
}

TEST_CASE("latent_stochastic_update gain and structure") {
  // Two members engineered so Cov(z, z) = 1 and Cov(Y, Y) = 2: the gain is
  // exactly one half.
  const double s = std::sqrt(0.5);
  Ensemble z = make_ensemble({{-s, s}}, Space::kLatent);
  ObsEnsemble y;
  y.space = Space::kLatent;
  y.values.resize(1, 2);
  y.values << -1.0, 1.0;
  const Ensemble a = latent_stochastic_update(
      z, y, Eigen::MatrixXd::Identity(1, 1), vec1(0.0));
  CHECK(a.members(0, 0) == doctest::Approx(-s + 0.5));
  CHECK(a.members(0, 1) == doctest::Approx(s - 0.5));

  // Zero observation noise with the observation at the ensemble mean keeps
  // members centered while contracting them toward the observation.
  ctf::RandomStream rng(51);
  Ensemble z2;
  z2.space = Space::kLatent;
  z2.members.resize(1, 2000);
  for (int j = 0; j < z2.size(); ++j) z2.members(0, j) = rng.normal();
  ObsEnsemble y2;
  y2.space = Space::kLatent;
  y2.values = z2.members;  // Y = H z with no noise
  const double target = z2.members.row(0).mean();
  const Ensemble a2 = latent_stochastic_update(
      z2, y2, Eigen::MatrixXd::Identity(1, 1), vec1(target));
  // Unit gain: every member lands exactly on the observed value.
  CHECK((a2.members.array() - target).abs().maxCoeff() < 1e-9);
}

TEST_CASE("latent update converges to the exact conjugate update") {
  ctf::RandomStream rng(61);
  GaussianParams prior;
  prior.mean = Eigen::Vector2d(0.4, -0.2);
  prior.cov.resize(2, 2);
  prior.cov << 1.0, 0.6, 0.6, 0.9;
  Eigen::MatrixXd H(1, 2);
  H << 1.0, 0.0;
  const double r = 0.3;
  const Eigen::VectorXd y_obs = vec1(0.9);

  const int n = 200000;
  Ensemble z;
  z.space = Space::kLatent;
  z.members.resize(2, n);
  const Eigen::MatrixXd L = prior.cov.llt().matrixL();
  for (int j = 0; j < n; ++j) {
    z.members.col(j) = prior.mean + L * rng.normal_vector(2);
  }
  ObsEnsemble y;
  y.space = Space::kLatent;
  y.values.resize(1, n);
  for (int j = 0; j < n; ++j) {
    y.values(0, j) = (H * z.members.col(j))(0) + std::sqrt(r) * rng.normal();
  }
  const Ensemble analysis = latent_stochastic_update(z, y, H, y_obs);

  const GaussianParams exact =
      ctf::ctf_update(prior, H, Eigen::MatrixXd::Constant(1, 1, r), y_obs);
  const Eigen::VectorXd mean = analysis.members.rowwise().mean();
  const Eigen::MatrixXd cov =
      ctf::sample_cov(analysis.members, analysis.members);
  const double tol = 5.0 / std::sqrt(static_cast<double>(n));
  CHECK((mean - exact.mean).norm() / exact.mean.norm() < tol);
  CHECK((cov - exact.cov).norm() / exact.cov.norm() < tol);
}

TEST_CASE("explicit observation-noise route agrees with the direct route") {
  // The alternative formulation estimates the latent noise covariance
  // explicitly and draws fresh noise; both routes must target the same
  // conjugate update.
  ctf::RandomStream rng(71);
  GaussianParams prior;
  prior.mean = Eigen::Vector2d(0.1, 0.5);
  prior.cov.resize(2, 2);
  prior.cov << 0.8, 0.3, 0.3, 0.7;
  Eigen::MatrixXd H(1, 2);
  H << 1.0, 0.0;
  const double r = 0.2;
  const Eigen::VectorXd y_obs = vec1(0.4);

  const int n = 200000;
  Ensemble z;
  z.space = Space::kLatent;
  z.members.resize(2, n);
  const Eigen::MatrixXd L = prior.cov.llt().matrixL();
  for (int j = 0; j < n; ++j) {
    z.members.col(j) = prior.mean + L * rng.normal_vector(2);
  }
  ObsEnsemble y;
  y.space = Space::kLatent;
  y.values.resize(1, n);
  for (int j = 0; j < n; ++j) {
    y.values(0, j) = (H * z.members.col(j))(0) + std::sqrt(r) * rng.normal();
  }

  // Explicit route: R_hat = Cov(Y,Y) - Cov(Hz,Hz), E ~ N(0, R_hat), then the
  // perturbed-observation formula with freshly drawn noise.
  const Eigen::MatrixXd hz = H * z.members;
  const Eigen::MatrixXd innov = ctf::sample_cov(y.values, y.values);
  const Eigen::MatrixXd r_hat = innov - ctf::sample_cov(hz, hz);
  REQUIRE(r_hat(0, 0) > 0.0);
  const Eigen::MatrixXd cross = ctf::sample_cov(z.members, hz);
  const Eigen::MatrixXd gain = cross * innov.inverse();
  Ensemble explicit_route;
  explicit_route.space = Space::kLatent;
  explicit_route.members.resize(2, n);
  const double r_sd = std::sqrt(r_hat(0, 0));
  for (int j = 0; j < n; ++j) {
    const double noise = r_sd * rng.normal();
    explicit_route.members.col(j) =
        z.members.col(j) +
        gain * (y_obs - hz.col(j) - Eigen::VectorXd::Constant(1, noise));
  }

  const GaussianParams exact =
      ctf::ctf_update(prior, H, Eigen::MatrixXd::Constant(1, 1, r), y_obs);
  const Eigen::VectorXd mean = explicit_route.members.rowwise().mean();
  const Eigen::MatrixXd cov =
      ctf::sample_cov(explicit_route.members, explicit_route.members);
  const double tol = 6.0 / std::sqrt(static_cast<double>(n));
  CHECK((mean - exact.mean).norm() / std::max(1.0, exact.mean.norm()) < tol);
  CHECK((cov - exact.cov).norm() / exact.cov.norm() < tol);
}

TEST_CASE("back_transform") {
  const Ensemble latent = make_ensemble({{-1.0, 0.0, 2.0}}, Space::kLatent);
  const Ensemble same = back_transform(latent, Transform::identity(1));
  CHECK(same.members == latent.members);
  CHECK(same.space == Space::kPhysical);

  const Ensemble positive = back_transform(latent, Transform::exp(1));
  CHECK((positive.members.array() > 0.0).all());

  // Round trip through fit_prior_latent's latent ensemble.
  ctf::RandomStream rng(81);
  GaussianParams base;
  base.mean = Eigen::Vector2d(0.2, -0.1);
  base.cov = Eigen::Matrix2d::Identity();
  const Transform f =
      Transform::partition(Transform::exp(1), Transform::logistic(1));
  const Ensemble phys =
      sample_pushforward(ctf::PushforwardDensity{f, base}, 500, rng);
  const auto [params, lat] = fit_prior_latent(phys, f);
  (void)params;
  const Ensemble round = back_transform(lat, f);
  CHECK((round.members - phys.members).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ectf_assimilate: identity reduction is bit-exact") {
  ctf::RandomStream rng(91);
  Ensemble prior;
  prior.space = Space::kPhysical;
  prior.members.resize(2, 500);
  for (int j = 0; j < prior.size(); ++j) {
    prior.members.col(j) = rng.normal_vector(2);
  }
  const ctf::LikelihoodSampler sampler =
      [](const Eigen::VectorXd& member, ctf::RandomStream& rs) {
        return Eigen::VectorXd::Constant(
            1, member(member.size() - 1) + 0.5 * rs.normal());
      };
  const Eigen::VectorXd y = vec1(0.3);

  ctf::RandomStream rng_a(1234);
  ctf::RandomStream rng_b(1234);
  const Transform f = Transform::partition(Transform::identity(2),
                                           Transform::identity(1));
  const Ensemble a = ectf_assimilate(prior, select_first, f,
                                     Transform::identity(1), y, sampler, rng_a);
  const Ensemble b = enkf_assimilate(prior, select_first, y, sampler, rng_b);
  CHECK(a.members == b.members);
}

TEST_CASE("ectf_assimilate keeps every analysis member inside the bounds") {
  ctf::RandomStream rng(101);
  GaussianParams base;
  base.mean = Eigen::Vector2d(0.4, 0.6);
  base.cov.resize(2, 2);
  const double rho = 0.99, s1 = 1.5, s2 = 1.1;
  base.cov << s1, rho * std::sqrt(s1 * s2), rho * std::sqrt(s1 * s2), s2;
  const Transform state_f =
      Transform::partition(Transform::exp(1), Transform::logistic(1));
  const Ensemble prior =
      sample_pushforward(ctf::PushforwardDensity{state_f, base}, 5000, rng);

  const double r = 0.01;
  const ctf::LikelihoodSampler sampler =
      [r](const Eigen::VectorXd& member, ctf::RandomStream& rs) {
        return Eigen::VectorXd::Constant(
            1, member(member.size() - 1) * std::exp(std::sqrt(r) * rs.normal()));
      };
  const Transform f = Transform::partition(state_f, Transform::exp(1));
  const Ensemble analysis =
      ectf_assimilate(prior, select_first, f, Transform::exp(1), vec1(0.5),
                      sampler, rng);
  CHECK((analysis.members.row(0).array() > 0.0).all());
  CHECK((analysis.members.row(1).array() > 0.0).all());
  CHECK((analysis.members.row(1).array() < 1.0).all());
  CHECK((analysis.members.row(2).array() > 0.0).all());
}

TEST_CASE("ectf at large N reproduces the grid posterior") {
  ctf::RandomStream rng(111);
  GaussianParams base;
  base.mean = Eigen::Vector2d(0.3, 0.2);
  base.cov.resize(2, 2);
  const double rho = 0.99, s1 = 1.2, s2 = 0.9;
  base.cov << s1, rho * std::sqrt(s1 * s2), rho * std::sqrt(s1 * s2), s2;
  const Transform state_f =
      Transform::partition(Transform::exp(1), Transform::logistic(1));
  const int n = 1000000;
  const Ensemble prior =
      sample_pushforward(ctf::PushforwardDensity{state_f, base}, n, rng);

  const double r = 0.01, y = 1.1;
  const ctf::LikelihoodSampler sampler =
      [r](const Eigen::VectorXd& member, ctf::RandomStream& rs) {
        return Eigen::VectorXd::Constant(
            1, member(member.size() - 1) * std::exp(std::sqrt(r) * rs.normal()));
      };
  const Transform f_ext = Transform::partition(state_f, Transform::exp(1));
  const Ensemble ext = ectf_assimilate(prior, select_first, f_ext,
                                       Transform::exp(1), vec1(y), sampler,
                                       rng);
  Ensemble analysis{ext.members.topRows(2), Space::kPhysical};

  ctf::GridSpec grid;
  grid.n_z1 = 2500;
  grid.z1_spacing = ctf::GridSpacing::kLogUniform;
  grid.n_z2 = 100;
  const auto lik = [r](double z1, double, double obs) {
    const double d = std::log(obs) - std::log(z1);
    return -0.5 * std::log(2.0 * M_PI * r) - d * d / (2.0 * r) -
           std::log(obs);
  };
  const ctf::GridPosterior truth =
      grid_posterior(ctf::PushforwardDensity{state_f, base}, lik, y, grid);
  const ctf::GridPosterior hist = ensemble_histogram(analysis, grid);
  CHECK(js_divergence(hist, truth) < 1e-3);
}

TEST_CASE("ectf_assimilate rejects a mismatched observation transform") {
  Ensemble prior = make_ensemble({{1.0, 2.0}, {0.4, 0.5}}, Space::kPhysical);
  const Transform f = Transform::partition(
      Transform::partition(Transform::exp(1), Transform::logistic(1)),
      Transform::exp(1));
  const ctf::LikelihoodSampler sampler =
      [](const Eigen::VectorXd& member, ctf::RandomStream&) {
        return Eigen::VectorXd::Constant(1, member(member.size() - 1));
      };
  ctf::RandomStream rng(1);
  CHECK_THROWS(ectf_assimilate(prior, select_first, f, Transform::logistic(1),
                               vec1(0.5), sampler, rng));
}
