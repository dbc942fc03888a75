#include "ctf/gaussian.hpp"

#include <cmath>
#include <string>

#include "ctf/error.hpp"

namespace ctf {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_square(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": matrix must be square");
  }
}

}  // namespace

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& m,
                                       const char* what) {
  check_square(m, what);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter =
      1e-12 * m.trace() / static_cast<double>(m.rows());
  Eigen::MatrixXd jittered = m;
  jittered.diagonal().array() += jitter;
  llt.compute(jittered);
  if (llt.info() == Eigen::Success) return llt;
  throw NumericalError(std::string(what) +
                       ": Cholesky factorization failed after jitter");
}

double pushforward_logpdf(const PushforwardDensity& d,
                          const Eigen::VectorXd& x) {
  if (d.transform.dim() != d.base.dim()) {
    throw DimensionError("pushforward_logpdf: transform/base dimension mismatch");
  }
  const Eigen::VectorXd u = d.transform.inverse(x);
  const double log_det_corr = d.transform.log_det_jacobian_inverse(x);

  const auto llt = factor_spd(d.base.cov, "pushforward_logpdf");
  const Eigen::VectorXd diff = u - d.base.mean;
  const Eigen::VectorXd w = llt.matrixL().solve(diff);
  double log_det_cov = 0.0;
  for (int i = 0; i < d.base.dim(); ++i) {
    log_det_cov += 2.0 * std::log(llt.matrixL()(i, i));
  }
  const double log_phi = -0.5 * (d.base.dim() * kLog2Pi + log_det_cov +
                                 w.squaredNorm());
  return log_phi + log_det_corr;
}

Ensemble sample_pushforward(const PushforwardDensity& d, int n,
                            RandomStream& rng) {
  if (n < 1) throw DimensionError("sample_pushforward: n must be >= 1");
  const int dim = d.base.dim();
  if (d.transform.dim() != dim) {
    throw DimensionError("sample_pushforward: transform/base dimension mismatch");
  }
  const auto llt = factor_spd(d.base.cov, "sample_pushforward");
  const Eigen::MatrixXd L = llt.matrixL();

  Ensemble out;
  out.space = Space::kPhysical;
  out.members.resize(dim, n);
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd latent = d.base.mean + L * rng.normal_vector(dim);
    for (int i = 0; i < dim; ++i) {
      const double y = d.transform.forward_coord(i, latent(i));
      out.members(i, j) = d.transform.domain(i).nudge_inside(y);
    }
  }
  return out;
}

GaussianParams gaussian_product(const GaussianParams& u, const LinearMap& map,
                                const Eigen::MatrixXd& sigma_v,
                                const Eigen::VectorXd& v_tilde) {
  const int du = u.dim();
  const int dv = static_cast<int>(map.A.rows());
  if (map.A.cols() != du || map.b.size() != dv || sigma_v.rows() != dv ||
      sigma_v.cols() != dv || v_tilde.size() != dv || u.cov.rows() != du) {
    throw DimensionError("gaussian_product: nonconforming dimensions");
  }
  const Eigen::MatrixXd innov =
      symmetrized(sigma_v + map.A * u.cov * map.A.transpose());
  const auto llt = factor_spd(innov, "gaussian_product");
  // B = Sigma_u A^T innov^-1, via innov B^T = A Sigma_u.
  const Eigen::MatrixXd B = llt.solve(map.A * u.cov).transpose();
  GaussianParams out;
  out.cov = symmetrized((Eigen::MatrixXd::Identity(du, du) - B * map.A) * u.cov);
  out.mean = u.mean + B * (v_tilde - map.b - map.A * u.mean);
  return out;
}

GaussianParams gaussian_product_precision_form(const GaussianParams& u,
                                               const LinearMap& map,
                                               const Eigen::MatrixXd& sigma_v,
                                               const Eigen::VectorXd& v_tilde) {
  const int du = u.dim();
  const int dv = static_cast<int>(map.A.rows());
  if (map.A.cols() != du || map.b.size() != dv || sigma_v.rows() != dv ||
      sigma_v.cols() != dv || v_tilde.size() != dv || u.cov.rows() != du) {
    throw DimensionError("gaussian_product: nonconforming dimensions");
  }
  const Eigen::MatrixXd eye_u = Eigen::MatrixXd::Identity(du, du);
  const Eigen::MatrixXd eye_v = Eigen::MatrixXd::Identity(dv, dv);
  const Eigen::MatrixXd prec_u =
      factor_spd(u.cov, "gaussian_product_precision_form").solve(eye_u);
  const Eigen::MatrixXd prec_v =
      factor_spd(sigma_v, "gaussian_product_precision_form").solve(eye_v);
  const Eigen::MatrixXd prec_p =
      symmetrized(prec_u + map.A.transpose() * prec_v * map.A);
  GaussianParams out;
  out.cov = symmetrized(
      factor_spd(prec_p, "gaussian_product_precision_form").solve(eye_u));
  out.mean = out.cov * (prec_u * u.mean +
                        map.A.transpose() * prec_v * (v_tilde - map.b));
  return out;
}

GaussianParams gaussian_marginalize(const GaussianParams& u,
                                    const LinearMap& map,
                                    const Eigen::MatrixXd& sigma_v) {
  const int du = u.dim();
  const int dv = static_cast<int>(map.A.rows());
  if (map.A.cols() != du || map.b.size() != dv || sigma_v.rows() != dv ||
      sigma_v.cols() != dv || u.cov.rows() != du) {
    throw DimensionError("gaussian_marginalize: nonconforming dimensions");
  }
  GaussianParams out;
  out.mean = map.A * u.mean + map.b;
  out.cov = symmetrized(map.A * u.cov * map.A.transpose() + sigma_v);
  return out;
}

}  // namespace ctf
