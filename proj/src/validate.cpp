#include "ctf/validate.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "ctf/baselines.hpp"
#include "ctf/ectf.hpp"
#include "ctf/error.hpp"
#include "ctf/filter.hpp"
#include "ctf/gaussian.hpp"
#include "ctf/random.hpp"
#include "ctf/transform.hpp"

namespace ctf {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// Random SPD matrix with unit-scale eigenvalues.
Eigen::MatrixXd random_spd(int d, RandomStream& rng) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  }
  return a * a.transpose() + 0.2 * Eigen::MatrixXd::Identity(d, d);
}

CheckResult check_round_trips() {
  RandomStream rng(101);
  double worst = 0.0;
  const std::vector<Transform> kinds = {
      Transform::identity(3),
      Transform::affine(Eigen::Vector3d(2.0, -0.5, 1.5),
                        Eigen::Vector3d(0.1, 3.0, -2.0)),
      Transform::exp(3),
      Transform::logistic(3),
      Transform::compose({Transform::affine(Eigen::Vector3d(0.5, 2.0, 1.0),
                                            Eigen::Vector3d(0, 0, 0)),
                          Transform::exp(3)}),
      Transform::partition(Transform::exp(2), Transform::logistic(1)),
  };
  for (const Transform& t : kinds) {
    for (int k = 0; k < 1000; ++k) {
      const Eigen::VectorXd x = 3.0 * rng.normal_vector(t.dim());
      const Eigen::VectorXd back = t.inverse(t.forward(x));
      for (int i = 0; i < t.dim(); ++i) {
        const double scale = std::max(1.0, std::abs(x(i)));
        worst = std::max(worst, std::abs(back(i) - x(i)) / scale);
      }
    }
  }
  return {"transform round trips (1e-9)", worst < 1e-9,
          "max relative error " + fmt(worst)};
}

CheckResult check_jacobians() {
  RandomStream rng(202);
  double worst = 0.0;
  const std::vector<Transform> kinds = {
      Transform::identity(2),
      Transform::affine(Eigen::Vector2d(1.7, -0.3), Eigen::Vector2d(0.2, 1.0)),
      Transform::exp(2),
      Transform::logistic(2),
      Transform::compose({Transform::affine(Eigen::Vector2d(0.8, 1.2),
                                            Eigen::Vector2d(0, 0)),
                          Transform::logistic(2)}),
  };
  for (const Transform& t : kinds) {
    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd x = rng.normal_vector(t.dim());
      const Eigen::VectorXd y = t.forward(x);
      // Central differences of the inverse map give the Jacobian diagonal.
      double log_det_fd = 0.0;
      for (int i = 0; i < t.dim(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(y(i)));
        const double up = t.inverse_coord(i, y(i) + h);
        const double dn = t.inverse_coord(i, y(i) - h);
        log_det_fd += std::log(std::abs((up - dn) / (2.0 * h)));
      }
      const double exact = t.log_det_jacobian_inverse(y);
      const double scale = std::max(1.0, std::abs(exact));
      worst = std::max(worst, std::abs(exact - log_det_fd) / scale);
    }
  }
  return {"inverse-Jacobian log-determinants vs finite differences (1e-5)",
          worst < 1e-5, "max relative error " + fmt(worst)};
}

CheckResult check_product_two_forms() {
  RandomStream rng(303);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int du = 1 + static_cast<int>(rng.uniform() * 5);
    const int dv = 1 + static_cast<int>(rng.uniform() * 5);
    GaussianParams u{rng.normal_vector(du), random_spd(du, rng)};
    LinearMap map;
    map.A.resize(dv, du);
    for (int i = 0; i < dv; ++i) {
      for (int j = 0; j < du; ++j) map.A(i, j) = rng.normal();
    }
    map.b = rng.normal_vector(dv);
    const Eigen::MatrixXd sigma_v = random_spd(dv, rng);
    const Eigen::VectorXd v_tilde = rng.normal_vector(dv);

    const GaussianParams gain = gaussian_product(u, map, sigma_v, v_tilde);
    const GaussianParams prec =
        gaussian_product_precision_form(u, map, sigma_v, v_tilde);
    const double scale_m = std::max(1.0, gain.mean.norm());
    const double scale_c = std::max(1.0, gain.cov.norm());
    worst = std::max(worst, (gain.mean - prec.mean).norm() / scale_m);
    worst = std::max(worst, (gain.cov - prec.cov).norm() / scale_c);
  }
  return {"latent product: gain form vs precision form (rel 1e-10)",
          worst < 1e-10, "max relative difference " + fmt(worst)};
}

CheckResult check_product_quadrature() {
  // Scalar case against trapezoid quadrature of the defining integrals.
  GaussianParams u;
  u.mean = Eigen::VectorXd::Constant(1, 0.4);
  u.cov = Eigen::MatrixXd::Constant(1, 1, 0.8);
  LinearMap map{Eigen::MatrixXd::Constant(1, 1, 1.3),
                Eigen::VectorXd::Constant(1, -0.2)};
  const Eigen::MatrixXd sigma_v = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const Eigen::VectorXd v_tilde = Eigen::VectorXd::Constant(1, 1.1);

  const int n = 40001;
  const double lo = -12.0, hi = 12.0;
  const double h = (hi - lo) / (n - 1);
  auto gauss = [](double x, double m, double var) {
    return std::exp(-0.5 * (x - m) * (x - m) / var) /
           std::sqrt(2.0 * M_PI * var);
  };
  double mass = 0.0, mean = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + h * i;
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    const double f = gauss(x, u.mean(0), u.cov(0, 0)) *
                     gauss(v_tilde(0), map.A(0, 0) * x + map.b(0),
                           sigma_v(0, 0));
    mass += w * f;
    mean += w * f * x;
  }
  mean /= mass;
  double var = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + h * i;
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    const double f = gauss(x, u.mean(0), u.cov(0, 0)) *
                     gauss(v_tilde(0), map.A(0, 0) * x + map.b(0),
                           sigma_v(0, 0));
    var += w * f * (x - mean) * (x - mean);
  }
  var /= mass;

  const GaussianParams prod = gaussian_product(u, map, sigma_v, v_tilde);
  const double err_prod = std::max(std::abs(prod.mean(0) - mean),
                                   std::abs(prod.cov(0, 0) - var));

  // Marginalization against quadrature of the latent predictive moments.
  double marg_mean = 0.0, marg_m2 = 0.0, marg_mass = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + h * i;
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    const double f = gauss(x, u.mean(0), u.cov(0, 0));
    const double cond_mean = map.A(0, 0) * x + map.b(0);
    marg_mass += w * f;
    marg_mean += w * f * cond_mean;
    marg_m2 += w * f * (sigma_v(0, 0) + cond_mean * cond_mean);
  }
  marg_mean /= marg_mass;
  const double marg_var = marg_m2 / marg_mass - marg_mean * marg_mean;
  const GaussianParams marg = gaussian_marginalize(u, map, sigma_v);
  const double err_marg = std::max(std::abs(marg.mean(0) - marg_mean),
                                   std::abs(marg.cov(0, 0) - marg_var));

  const double err = std::max(err_prod, err_marg);
  return {"latent product/marginalization vs quadrature (1e-6)", err < 1e-6,
          "max moment error " + fmt(err)};
}

CheckResult check_kf_equivalence() {
  RandomStream rng(404);
  const int d = 3, r = 2;
  FilterState state{Transform::identity(d),
                    {rng.normal_vector(d), random_spd(d, rng)}, 0};
  GaussianParams kf = state.latent;

  LatentSSM ssm{Eigen::MatrixXd(d, d), random_spd(d, rng),
                Eigen::MatrixXd(r, d), random_spd(r, rng),
                Transform::identity(d), Transform::identity(r)};
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) ssm.M(i, j) = rng.normal() * 0.4;
  }
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < d; ++j) ssm.H(i, j) = rng.normal();
  }

  double worst = 0.0;
  for (int cycle = 0; cycle < 10; ++cycle) {
    const Eigen::VectorXd y = rng.normal_vector(r);
    state = ctf_filter_step(state, ssm, y);

    // Textbook Kalman filter, written out directly.
    const Eigen::VectorXd mean_f = ssm.M * kf.mean;
    const Eigen::MatrixXd cov_f =
        ssm.M * kf.cov * ssm.M.transpose() + ssm.Q;
    const Eigen::MatrixXd innov =
        ssm.H * cov_f * ssm.H.transpose() + ssm.R_cov;
    const Eigen::MatrixXd gain =
        cov_f * ssm.H.transpose() * innov.inverse();
    kf.mean = mean_f + gain * (y - ssm.H * mean_f);
    kf.cov = (Eigen::MatrixXd::Identity(d, d) - gain * ssm.H) * cov_f;
    kf.cov = symmetrized(kf.cov);

    worst = std::max(worst, (state.latent.mean - kf.mean).norm());
    worst = std::max(worst, (state.latent.cov - kf.cov).norm());
  }
  return {"Kalman equivalence under identity transforms (1e-10)",
          worst < 1e-10, "max deviation " + fmt(worst)};
}

CheckResult check_observation_consistency() {
  // Joint state-observation setup with H = [O | I] and g equal to the
  // observation block of f; the posterior observation block collapses onto
  // the latent observation as the noise vanishes.
  const Transform f =
      Transform::partition(Transform::partition(Transform::exp(1),
                                                Transform::logistic(1)),
                           Transform::exp(1));
  GaussianParams latent;
  latent.mean = Eigen::Vector3d(0.2, -0.4, 0.2);
  Eigen::Matrix3d cov;
  cov << 1.0, 0.5, 0.9, 0.5, 0.8, 0.45, 0.9, 0.45, 1.0;
  latent.cov = cov + 0.05 * Eigen::Matrix3d::Identity();
  Eigen::MatrixXd H(1, 3);
  H << 0, 0, 1;
  const double y = 0.7;
  const double y_tilde = std::log(y);

  double prev_mean_err = std::numeric_limits<double>::infinity();
  double prev_spread = std::numeric_limits<double>::infinity();
  bool monotone = true;
  double final_err = 0.0, final_spread = 0.0;
  for (double sigma2 : {1e-4, 1e-8, 1e-12}) {
    const GaussianParams post =
        ctf_update(latent, H, Eigen::MatrixXd::Constant(1, 1, sigma2),
                   Eigen::VectorXd::Constant(1, y_tilde));
    const double mean_err = std::abs((H * post.mean)(0) - y_tilde);
    const double spread = std::sqrt((H * post.cov * H.transpose())(0, 0));
    if (mean_err > prev_mean_err || spread > prev_spread) monotone = false;
    prev_mean_err = mean_err;
    prev_spread = spread;
    final_err = mean_err;
    final_spread = spread;
  }
  const bool pass = monotone && final_err < 1e-10 && final_spread < 1e-5;
  return {"observation-space consistency limit", pass,
          "final mean error " + fmt(final_err) + ", spread " +
              fmt(final_spread) + (monotone ? ", monotone" : ", NOT monotone")};
}

CheckResult check_identity_reduction() {
  // With identity transforms and a shared stream, the general pipeline and
  // the EnKF must produce bit-identical ensembles.
  RandomStream rng(606);
  const int d = 2, n = 200;
  Ensemble prior;
  prior.space = Space::kPhysical;
  prior.members.resize(d, n);
  for (int j = 0; j < n; ++j) prior.members.col(j) = rng.normal_vector(d);

  const ObsOperator h = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, x(0));
  };
  const LikelihoodSampler sampler = [](const Eigen::VectorXd& z,
                                       RandomStream& r) {
    return Eigen::VectorXd::Constant(1, z(z.size() - 1) + 0.3 * r.normal());
  };
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 0.8);

  RandomStream rng_a(777);
  RandomStream rng_b(777);
  const Transform f = Transform::partition(Transform::identity(d),
                                           Transform::identity(1));
  const Ensemble via_general =
      ectf_assimilate(prior, h, f, Transform::identity(1), y, sampler, rng_a);
  const Ensemble via_enkf = enkf_assimilate(prior, h, y, sampler, rng_b);
  const bool identical = via_general.members == via_enkf.members;
  return {"identity-transform reduction is bit-exact", identical,
          identical ? "ensembles identical" : "ensembles differ"};
}

CheckResult check_pushforward_normalization() {
  // 1-D quadrature of the pushforward densities over their image domains.
  double worst = 0.0;
  {
    PushforwardDensity d{Transform::exp(1),
                         {Eigen::VectorXd::Constant(1, 0.3),
                          Eigen::MatrixXd::Constant(1, 1, 0.7)}};
    const int n = 20001;
    const double lo = std::exp(0.3 - 8.0 * std::sqrt(0.7));
    const double hi = std::exp(0.3 + 8.0 * std::sqrt(0.7));
    const double lh = std::log(lo), step = (std::log(hi) - lh) / (n - 1);
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = std::exp(lh + step * i);
      const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      // trapezoid in log coordinates: dx = x d(ln x)
      mass += w * std::exp(pushforward_logpdf(d, Eigen::VectorXd::Constant(1, x))) *
              x * step;
    }
    worst = std::max(worst, std::abs(mass - 1.0));
  }
  {
    PushforwardDensity d{Transform::logistic(1),
                         {Eigen::VectorXd::Constant(1, -0.5),
                          Eigen::MatrixXd::Constant(1, 1, 1.4)}};
    const int n = 20001;
    const double lo = 1e-9, hi = 1.0 - 1e-9;
    const double step = (hi - lo) / (n - 1);
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = lo + step * i;
      const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      mass += w * std::exp(pushforward_logpdf(d, Eigen::VectorXd::Constant(1, x))) *
              step;
    }
    worst = std::max(worst, std::abs(mass - 1.0));
  }
  return {"pushforward densities normalize to 1 (1e-4)", worst < 1e-4,
          "max |mass - 1| " + fmt(worst)};
}

}  // namespace

std::vector<CheckResult> run_validation_suite() {
  return {
      check_round_trips(),
      check_jacobians(),
      check_product_two_forms(),
      check_product_quadrature(),
      check_kf_equivalence(),
      check_observation_consistency(),
      check_identity_reduction(),
      check_pushforward_normalization(),
  };
}

}  // namespace ctf
