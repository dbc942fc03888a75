#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "ctf/error.hpp"
#include "ctf/oracle.hpp"
#include "ctf/random.hpp"

using ctf::Ensemble;
using ctf::GaussianParams;
using ctf::GridPosterior;
using ctf::GridSpec;
using ctf::PushforwardDensity;
using ctf::Space;
using ctf::Transform;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GridSpec small_grid(int n1, int n2) {
  GridSpec g;
  g.z1_min = 0.1;
  g.z1_max = 10.0;
  g.n_z1 = n1;
  g.z2_min = 0.05;
  g.z2_max = 0.95;
  g.n_z2 = n2;
  return g;
}

PushforwardDensity section5_prior(double rho, double s1, double s2,
                                  double m1, double m2) {
  GaussianParams base;
  base.mean = Eigen::Vector2d(m1, m2);
  base.cov.resize(2, 2);
  base.cov << s1, rho * std::sqrt(s1 * s2), rho * std::sqrt(s1 * s2), s2;
  return {Transform::partition(Transform::exp(1), Transform::logistic(1)),
          base};
}

ctf::LikelihoodLogPdf lognormal_lik(double r) {
  return [r](double z1, double, double y) {
    const double d = std::log(y) - std::log(z1);
    return -0.5 * std::log(2.0 * M_PI * r) - d * d / (2.0 * r) - std::log(y);
  };
}

Ensemble ensemble_of(std::initializer_list<std::pair<double, double>> pts) {
  Ensemble e;
  e.space = Space::kPhysical;
  e.members.resize(2, static_cast<int>(pts.size()));
  int j = 0;
  for (const auto& [a, b] : pts) {
    e.members(0, j) = a;
    e.members(1, j) = b;
    ++j;
  }
  return e;
}

}  // namespace

TEST_CASE("flat prior and likelihood give equal masses on a 2x2 grid") {
  GridSpec g;
  g.z1_min = 0.0;
  g.z1_max = 1.0;
  g.n_z1 = 2;
  g.z2_min = 0.0;
  g.z2_max = 1.0;
  g.n_z2 = 2;
  g.bounds1 = {-kInf, kInf};
  g.bounds2 = {-kInf, kInf};
  GaussianParams wide{Eigen::Vector2d::Zero(),
                      1e8 * Eigen::Matrix2d::Identity()};
  const GridPosterior p = grid_posterior(
      {Transform::identity(2), wide},
      [](double, double, double) { return 0.0; }, 1.0, g);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(p.masses(i, j) == doctest::Approx(0.25).epsilon(1e-6));
    }
  }
  CHECK(p.masses.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uninformative observation keeps the posterior at the prior") {
  const PushforwardDensity prior = section5_prior(0.5, 0.8, 0.6, 0.2, -0.1);
  GridSpec g = small_grid(400, 80);
  const GridPosterior with_obs =
      grid_posterior(prior, lognormal_lik(1e6), 1.0, g);
  const GridPosterior without = grid_posterior(
      prior, [](double, double, double) { return 0.0; }, 1.0, g);
  CHECK(js_divergence(with_obs, without) < 1e-3);
}

TEST_CASE("underflow everywhere is an error") {
  const PushforwardDensity prior = section5_prior(0.0, 1.0, 1.0, 0.0, 0.0);
  CHECK_THROWS_AS(
      grid_posterior(prior,
                     [](double, double, double) { return -kInf; }, 1.0,
                     small_grid(10, 10)),
      ctf::NumericalError);
}

TEST_CASE("histogram placement, clipping, and exclusion") {
  GridSpec g;
  g.z1_min = 1.0;
  g.z1_max = 5.0;
  g.n_z1 = 5;  // nodes 1, 2, 3, 4, 5
  g.z2_min = 0.1;
  g.z2_max = 0.9;
  g.n_z2 = 5;  // nodes 0.1, 0.3, 0.5, 0.7, 0.9

  const GridPosterior at_node = ensemble_histogram(
      ensemble_of({{3.0, 0.5}, {3.0, 0.5}}), g);
  CHECK(at_node.masses(2, 2) == doctest::Approx(1.0));

  // In-bounds but beyond the grid range: clipped to the edge bin.
  const GridPosterior clipped =
      ensemble_histogram(ensemble_of({{600.0, 0.5}}), g);
  CHECK(clipped.masses(4, 2) == doctest::Approx(1.0));

  // Out of physical bounds: excluded, masses renormalize over the rest.
  const GridPosterior excluded =
      ensemble_histogram(ensemble_of({{3.0, 0.5}, {3.0, -0.1}}), g);
  CHECK(excluded.masses(2, 2) == doctest::Approx(1.0));

  CHECK_THROWS_AS(ensemble_histogram(ensemble_of({{-1.0, 0.5}}), g),
                  ctf::NumericalError);
}

TEST_CASE("kl divergence examples") {
  GridSpec g;
  g.z1_min = 1.0;
  g.z1_max = 2.0;
  g.n_z1 = 2;
  g.z2_min = 0.4;
  g.z2_max = 0.6;
  g.n_z2 = 2;
  GridPosterior p{g, Eigen::MatrixXd::Zero(2, 2)};
  GridPosterior q{g, Eigen::MatrixXd::Zero(2, 2)};
  p.masses(0, 0) = 1.0;
  q.masses(0, 0) = 0.5;
  q.masses(1, 0) = 0.5;
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0));
  CHECK(kl_divergence(p, q) == doctest::Approx(std::log(2.0)));

  // Flooring keeps the reverse direction large but finite.
  const double reverse = kl_divergence(q, p);
  CHECK(std::isfinite(reverse));
  CHECK(reverse > 100.0);

  GridSpec other = g;
  other.n_z2 = 3;
  GridPosterior mismatched{other, Eigen::MatrixXd::Zero(2, 3)};
  CHECK_THROWS_AS(kl_divergence(p, mismatched), ctf::DimensionError);
}

TEST_CASE("js divergence examples") {
  GridSpec g;
  g.z1_min = 1.0;
  g.z1_max = 2.0;
  g.n_z1 = 2;
  g.z2_min = 0.4;
  g.z2_max = 0.6;
  g.n_z2 = 2;
  GridPosterior p{g, Eigen::MatrixXd::Zero(2, 2)};
  GridPosterior q{g, Eigen::MatrixXd::Zero(2, 2)};
  p.masses(0, 0) = 1.0;
  q.masses(1, 1) = 1.0;
  CHECK(js_divergence(p, p) == doctest::Approx(0.0));
  CHECK(js_divergence(p, q) == doctest::Approx(std::log(2.0)));
  CHECK(std::abs(js_divergence(p, q) - js_divergence(q, p)) < 1e-15);
}

TEST_CASE("js stays within [0, ln 2] on random mass tables") {
  ctf::RandomStream rng(201);
  GridSpec g;
  g.z1_min = 1.0;
  g.z1_max = 2.0;
  g.n_z1 = 8;
  g.z2_min = 0.4;
  g.z2_max = 0.6;
  g.n_z2 = 4;
  for (int k = 0; k < 200; ++k) {
    GridPosterior p{g, Eigen::MatrixXd::Zero(8, 4)};
    GridPosterior q{g, Eigen::MatrixXd::Zero(8, 4)};
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 4; ++j) {
        p.masses(i, j) = rng.uniform() < 0.3 ? rng.uniform() : 0.0;
        q.masses(i, j) = rng.uniform() < 0.3 ? rng.uniform() : 0.0;
      }
    }
    if (p.masses.sum() == 0.0 || q.masses.sum() == 0.0) continue;
    p.masses /= p.masses.sum();
    q.masses /= q.masses.sum();
    const double js = js_divergence(p, q);
    CHECK(js >= 0.0);
    CHECK(js <= std::log(2.0) + 1e-12);
  }
}

TEST_CASE("grid moments") {
  GridSpec g;
  g.z1_min = 1.0;
  g.z1_max = 5.0;
  g.n_z1 = 5;
  g.z2_min = 0.1;
  g.z2_max = 0.9;
  g.n_z2 = 5;
  GridPosterior unit{g, Eigen::MatrixXd::Zero(5, 5)};
  unit.masses(3, 1) = 1.0;  // node (4.0, 0.3)
  const auto [mean, sd] = grid_moments(unit);
  CHECK(mean(0) == doctest::Approx(4.0));
  CHECK(mean(1) == doctest::Approx(0.3));
  CHECK(sd.norm() == doctest::Approx(0.0));

  GridPosterior pair{g, Eigen::MatrixXd::Zero(5, 5)};
  pair.masses(0, 2) = 0.5;
  pair.masses(4, 2) = 0.5;  // nodes 1 and 5
  const auto [mean2, sd2] = grid_moments(pair);
  CHECK(mean2(0) == doctest::Approx(3.0));
  CHECK(sd2(0) == doctest::Approx(2.0));
}

TEST_CASE("fine-grid lognormal mean matches the closed form to 0.1%") {
  const double m = 0.1, v = 0.16;
  GaussianParams base;
  base.mean = Eigen::Vector2d(m, 0.0);
  base.cov.resize(2, 2);
  base.cov << v, 0.0, 0.0, 0.25;
  const PushforwardDensity prior{
      Transform::partition(Transform::exp(1), Transform::logistic(1)), base};
  GridSpec g;
  g.z1_min = 1e-4;
  g.z1_max = 50.0;
  g.n_z1 = 4000;
  g.z1_spacing = ctf::GridSpacing::kLogUniform;
  g.z2_min = 1e-6;
  g.z2_max = 1.0 - 1e-6;
  g.n_z2 = 200;
  const GridPosterior p = grid_posterior(
      prior, [](double, double, double) { return 0.0; }, 1.0, g);
  const auto [mean, sd] = grid_moments(p);
  (void)sd;
  const double analytic = std::exp(m + v / 2.0);
  CHECK(std::abs(mean(0) - analytic) / analytic < 1e-3);
}

TEST_CASE("skill_report") {
  const PushforwardDensity prior = section5_prior(0.3, 0.7, 0.5, 0.0, 0.0);
  GridSpec g = small_grid(500, 60);
  const GridPosterior truth =
      grid_posterior(prior, lognormal_lik(0.5), 1.2, g);

  // Self-consistency: an ensemble drawn from the truth scores near zero.
  ctf::RandomStream rng(211);
  const Ensemble self = sample_grid_posterior(truth, 100000, rng);
  const ctf::SkillReport rep = skill_report(self, truth);
  CHECK(rep.js < 0.05);  // sampling-noise floor for 1e5 draws on this grid
  CHECK(std::abs(rep.me_mean) < 0.02);
  CHECK(std::abs(rep.me_std) < 0.02);
  CHECK(rep.bounds_violation_pct == 0.0);

  // Half the members out of bounds.
  const ctf::SkillReport half =
      skill_report(ensemble_of({{0.5, 0.5}, {-1.0, 0.5}}), truth);
  CHECK(half.bounds_violation_pct == doctest::Approx(50.0));

  // A pure shift by delta in both coordinates moves me_mean by delta.
  const double delta = 0.05;
  Ensemble shifted = sample_grid_posterior(truth, 50000, rng);
  shifted.members.array() += delta;
  const ctf::SkillReport sh = skill_report(shifted, truth);
  CHECK(sh.me_mean == doctest::Approx(delta).epsilon(0.15));
}

TEST_CASE("posterior is stable under doubling the z2 resolution") {
  const PushforwardDensity prior = section5_prior(0.6, 0.9, 0.7, 0.3, -0.2);
  GridSpec coarse = small_grid(600, 100);
  GridSpec fine = coarse;
  fine.n_z2 = 200;
  const GridPosterior a = grid_posterior(prior, lognormal_lik(0.3), 1.5, coarse);
  const GridPosterior b = grid_posterior(prior, lognormal_lik(0.3), 1.5, fine);
  const Eigen::VectorXd ma = a.masses.rowwise().sum();
  const Eigen::VectorXd mb = b.masses.rowwise().sum();
  // JS of the shared z1 marginal.
  double js = 0.0;
  for (int i = 0; i < ma.size(); ++i) {
    const double avg = 0.5 * (ma(i) + mb(i));
    if (ma(i) > 0.0) js += 0.5 * ma(i) * std::log(ma(i) / avg);
    if (mb(i) > 0.0) js += 0.5 * mb(i) * std::log(mb(i) / avg);
  }
  CHECK(js < 1e-6);
}

TEST_CASE("histogram of oracle samples stays close to the oracle") {
  // Frozen regression threshold for the sampling-noise floor at one million
  // draws on the desk-scale grid.
  const PushforwardDensity prior = section5_prior(0.6, 1.2, 0.9, 0.2, -0.3);
  GridSpec g;
  g.n_z1 = 2500;
  g.z1_spacing = ctf::GridSpacing::kLogUniform;
  g.n_z2 = 100;
  const GridPosterior truth =
      grid_posterior(prior, lognormal_lik(0.5), 1.0, g);
  ctf::RandomStream rng(221);
  const Ensemble sample = sample_grid_posterior(truth, 1000000, rng);
  const GridPosterior hist = ensemble_histogram(sample, g);
  CHECK(js_divergence(hist, truth) < 5e-3);
}
