#include "ctf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctf/error.hpp"

namespace ctf {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kQFloor = 1e-300;

std::vector<double> linear_nodes(double lo, double hi, int n) {
  std::vector<double> nodes(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) nodes[i] = lo + h * i;
  nodes.back() = hi;
  return nodes;
}

std::vector<double> log_nodes(double lo, double hi, int n) {
  std::vector<double> nodes(n);
  const double llo = std::log(lo);
  const double h = (std::log(hi) - llo) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) nodes[i] = std::exp(llo + h * i);
  nodes.back() = hi;
  return nodes;
}

// Trapezoid-consistent local cell widths for arbitrary node spacing.
std::vector<double> cell_widths(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n);
  w[0] = 0.5 * (nodes[1] - nodes[0]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    w[i] = 0.5 * (nodes[i + 1] - nodes[i - 1]);
  }
  w[n - 1] = 0.5 * (nodes[n - 1] - nodes[n - 2]);
  return w;
}

// Pairwise sum for a deterministic, well-conditioned reduction.
double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

int bin_index(const std::vector<double>& nodes, double x) {
  // Bin of the nearest node, with edges at physical midpoints.
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
  if (it == nodes.begin()) return 0;
  if (it == nodes.end()) return static_cast<int>(nodes.size()) - 1;
  const int hi = static_cast<int>(it - nodes.begin());
  const int lo = hi - 1;
  return (x - nodes[lo] <= nodes[hi] - x) ? lo : hi;
}

void check_same_grid(const GridPosterior& p, const GridPosterior& q,
                     const char* what) {
  if (!(p.grid == q.grid)) {
    throw DimensionError(std::string(what) + ": grids differ");
  }
}

}  // namespace

std::vector<double> GridSpec::z1_nodes() const {
  if (n_z1 < 2) throw DimensionError("GridSpec: n_z1 must be >= 2");
  return z1_spacing == GridSpacing::kLogUniform
             ? log_nodes(z1_min, z1_max, n_z1)
             : linear_nodes(z1_min, z1_max, n_z1);
}

std::vector<double> GridSpec::z2_nodes() const {
  if (n_z2 < 2) throw DimensionError("GridSpec: n_z2 must be >= 2");
  return linear_nodes(z2_min, z2_max, n_z2);
}

bool GridSpec::operator==(const GridSpec& other) const {
  return z1_min == other.z1_min && z1_max == other.z1_max &&
         n_z1 == other.n_z1 && z1_spacing == other.z1_spacing &&
         z2_min == other.z2_min && z2_max == other.z2_max &&
         n_z2 == other.n_z2;
}

GridPosterior grid_posterior(const PushforwardDensity& prior,
                             const LikelihoodLogPdf& likelihood_logpdf,
                             double y_obs, const GridSpec& grid) {
  if (prior.transform.dim() != 2 || prior.base.dim() != 2) {
    throw DimensionError("grid_posterior: prior must be two-dimensional");
  }
  const std::vector<double> z1 = grid.z1_nodes();
  const std::vector<double> z2 = grid.z2_nodes();
  const std::vector<double> w1 = cell_widths(z1);
  const std::vector<double> w2 = cell_widths(z2);
  const int n1 = grid.n_z1;
  const int n2 = grid.n_z2;

  // Per-axis pullbacks and volume corrections; all shipped transforms act
  // coordinatewise, so the quadratic form is the only cross term.
  std::vector<double> u1(n1), ld1(n1), u2(n2), ld2(n2);
  for (int i = 0; i < n1; ++i) {
    u1[i] = prior.transform.inverse_coord(0, z1[i]);
    ld1[i] = prior.transform.log_inv_deriv_coord(0, z1[i]);
  }
  for (int j = 0; j < n2; ++j) {
    u2[j] = prior.transform.inverse_coord(1, z2[j]);
    ld2[j] = prior.transform.log_inv_deriv_coord(1, z2[j]);
  }

  const auto llt = factor_spd(prior.base.cov, "grid_posterior");
  const Eigen::Matrix2d prec =
      llt.solve(Eigen::Matrix2d::Identity());
  double log_det_cov = 0.0;
  for (int i = 0; i < 2; ++i) log_det_cov += 2.0 * std::log(llt.matrixL()(i, i));
  const double log_norm = -kLog2Pi - 0.5 * log_det_cov;
  const double mu1 = prior.base.mean(0);
  const double mu2 = prior.base.mean(1);

  Eigen::MatrixXd log_mass(n1, n2);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n2; ++j) {
    const double d2 = u2[j] - mu2;
    for (int i = 0; i < n1; ++i) {
      const double d1 = u1[i] - mu1;
      const double quad = prec(0, 0) * d1 * d1 + 2.0 * prec(0, 1) * d1 * d2 +
                          prec(1, 1) * d2 * d2;
      const double lp = log_norm - 0.5 * quad + ld1[i] + ld2[j] +
                        likelihood_logpdf(z1[i], z2[j], y_obs) +
                        std::log(w1[i] * w2[j]);
      log_mass(i, j) = lp;
      if (lp > max_log) max_log = lp;
    }
  }
  if (!std::isfinite(max_log)) {
    throw NumericalError("grid_posterior: all masses underflowed to zero");
  }

  GridPosterior out;
  out.grid = grid;
  out.masses = (log_mass.array() - max_log).exp().matrix();
  const double total =
      pairwise_sum(out.masses.data(), static_cast<std::size_t>(n1) * n2);
  if (!(total > 0.0)) {
    throw NumericalError("grid_posterior: normalization underflow");
  }
  out.masses /= total;
  return out;
}

GridPosterior ensemble_histogram(const Ensemble& ens, const GridSpec& grid) {
  if (ens.dim() != 2) {
    throw DimensionError("ensemble_histogram: expected a 2-D ensemble");
  }
  if (ens.space != Space::kPhysical) {
    throw Error("ensemble_histogram: expected a physical-space ensemble");
  }
  const std::vector<double> z1 = grid.z1_nodes();
  const std::vector<double> z2 = grid.z2_nodes();

  GridPosterior out;
  out.grid = grid;
  out.masses = Eigen::MatrixXd::Zero(grid.n_z1, grid.n_z2);
  long included = 0;
  for (int j = 0; j < ens.size(); ++j) {
    const double x1 = ens.members(0, j);
    const double x2 = ens.members(1, j);
    if (!grid.bounds1.contains(x1) || !grid.bounds2.contains(x2)) continue;
    out.masses(bin_index(z1, x1), bin_index(z2, x2)) += 1.0;
    ++included;
  }
  if (included == 0) {
    throw NumericalError("ensemble_histogram: no members inside the bounds");
  }
  out.masses /= static_cast<double>(included);
  return out;
}

double kl_divergence(const GridPosterior& p, const GridPosterior& q) {
  check_same_grid(p, q, "kl_divergence");
  double acc = 0.0;
  const double* pd = p.masses.data();
  const double* qd = q.masses.data();
  const std::size_t n = static_cast<std::size_t>(p.masses.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (pd[i] > 0.0) {
      acc += pd[i] * std::log(pd[i] / std::max(qd[i], kQFloor));
    }
  }
  return acc;
}

double js_divergence(const GridPosterior& p, const GridPosterior& q) {
  check_same_grid(p, q, "js_divergence");
  GridPosterior avg;
  avg.grid = p.grid;
  avg.masses = 0.5 * (p.masses + q.masses);
  return 0.5 * (kl_divergence(p, avg) + kl_divergence(q, avg));
}

std::pair<Eigen::Vector2d, Eigen::Vector2d> grid_moments(
    const GridPosterior& g) {
  const std::vector<double> z1 = g.grid.z1_nodes();
  const std::vector<double> z2 = g.grid.z2_nodes();
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int j = 0; j < g.grid.n_z2; ++j) {
    for (int i = 0; i < g.grid.n_z1; ++i) {
      const double m = g.masses(i, j);
      mean(0) += m * z1[i];
      mean(1) += m * z2[j];
    }
  }
  Eigen::Vector2d var = Eigen::Vector2d::Zero();
  for (int j = 0; j < g.grid.n_z2; ++j) {
    for (int i = 0; i < g.grid.n_z1; ++i) {
      const double m = g.masses(i, j);
      var(0) += m * (z1[i] - mean(0)) * (z1[i] - mean(0));
      var(1) += m * (z2[j] - mean(1)) * (z2[j] - mean(1));
    }
  }
  return {mean, var.cwiseSqrt()};
}

SkillReport skill_report(const Ensemble& analysis_ens,
                         const GridPosterior& truth) {
  const auto [true_mean, true_std] = grid_moments(truth);

  const int n = analysis_ens.size();
  Eigen::Vector2d ens_mean = analysis_ens.members.rowwise().mean();
  Eigen::Vector2d ens_var = Eigen::Vector2d::Zero();
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector2d d = analysis_ens.members.col(j) - ens_mean;
    ens_var += d.cwiseProduct(d);
  }
  ens_var /= static_cast<double>(n - 1);
  const Eigen::Vector2d ens_std = ens_var.cwiseSqrt();

  long violations = 0;
  for (int j = 0; j < n; ++j) {
    if (!truth.grid.bounds1.contains(analysis_ens.members(0, j)) ||
        !truth.grid.bounds2.contains(analysis_ens.members(1, j))) {
      ++violations;
    }
  }

  SkillReport report;
  if (violations == n) {
    // Every member outside the physical domain: the analysis distribution
    // and the truth have disjoint supports, the divergence limit.
    report.js = std::log(2.0);
  } else {
    report.js = js_divergence(ensemble_histogram(analysis_ens, truth.grid),
                              truth);
  }
  report.me_mean = 0.5 * ((ens_mean - true_mean).sum());
  report.me_std = 0.5 * ((ens_std - true_std).sum());
  report.bounds_violation_pct =
      100.0 * static_cast<double>(violations) / static_cast<double>(n);
  return report;
}

Ensemble sample_grid_posterior(const GridPosterior& g, int n,
                               RandomStream& rng) {
  const std::vector<double> z1 = g.grid.z1_nodes();
  const std::vector<double> z2 = g.grid.z2_nodes();
  const std::size_t cells = static_cast<std::size_t>(g.masses.size());
  std::vector<double> cumulative(cells);
  double acc = 0.0;
  const double* m = g.masses.data();
  for (std::size_t i = 0; i < cells; ++i) {
    acc += m[i];
    cumulative[i] = acc;
  }
  Ensemble out;
  out.space = Space::kPhysical;
  out.members.resize(2, n);
  for (int j = 0; j < n; ++j) {
    const double u = rng.uniform() * acc;
    const std::size_t cell = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), u) -
        cumulative.begin());
    const std::size_t idx = std::min(cell, cells - 1);
    // column-major: idx = i + j * n_z1
    const int i1 = static_cast<int>(idx % g.grid.n_z1);
    const int i2 = static_cast<int>(idx / g.grid.n_z1);
    out.members(0, j) = z1[i1];
    out.members(1, j) = z2[i2];
  }
  return out;
}

}  // namespace ctf
