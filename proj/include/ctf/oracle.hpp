#pragma once

#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ctf/ensemble.hpp"
#include "ctf/gaussian.hpp"
#include "ctf/random.hpp"
#include "ctf/transform.hpp"

namespace ctf {

enum class GridSpacing { kUniform, kLogUniform };

// Two-dimensional evaluation grid. Nodes are cell centers; histogram bin
// edges sit at the physical midpoints between neighboring nodes, and cell
// areas use the matching trapezoid-consistent local spacing so log-spaced
// grids stay correctly normalized.
struct GridSpec {
  double z1_min = 1e-15;
  double z1_max = 500.0;
  int n_z1 = 2500;
  GridSpacing z1_spacing = GridSpacing::kUniform;
  double z2_min = 1e-15;
  double z2_max = 1.0 - 1e-15;
  int n_z2 = 100;

  // Physical bounds used for violation accounting; members outside are
  // excluded from histograms.
  CoordInterval bounds1{0.0, std::numeric_limits<double>::infinity()};
  CoordInterval bounds2{0.0, 1.0};

  std::vector<double> z1_nodes() const;
  std::vector<double> z2_nodes() const;

  bool operator==(const GridSpec& other) const;
};

// Normalized probability masses over the grid cells.
struct GridPosterior {
  GridSpec grid;
  Eigen::MatrixXd masses;  // n_z1 x n_z2
};

// log p(y | z1, z2).
using LikelihoodLogPdf = std::function<double(double z1, double z2, double y)>;

// Pointwise Bayes update on the grid: mass_ij ∝ exp(prior + likelihood) *
// cell area, normalized through log-sum-exp. Throws NumericalError if every
// cell underflows to zero.
GridPosterior grid_posterior(const PushforwardDensity& prior,
                             const LikelihoodLogPdf& likelihood_logpdf,
                             double y_obs, const GridSpec& grid);

// Histogram of a physical 2-D ensemble on the grid. In-bounds members beyond
// the grid range are clipped to the edge bins; members violating the
// physical bounds are excluded and masses normalize over the rest.
GridPosterior ensemble_histogram(const Ensemble& ens, const GridSpec& grid);

// Sum over cells with p > 0 of p ln(p/q), with q floored at 1e-300.
double kl_divergence(const GridPosterior& p, const GridPosterior& q);

// 0.5 [KL(p||avg) + KL(q||avg)] with avg = (p+q)/2; bounded by ln 2.
double js_divergence(const GridPosterior& p, const GridPosterior& q);

// Mass-weighted mean and standard deviation per coordinate at cell centers.
std::pair<Eigen::Vector2d, Eigen::Vector2d> grid_moments(
    const GridPosterior& g);

struct SkillReport {
  double js = 0.0;
  double me_mean = 0.0;
  double me_std = 0.0;
  double bounds_violation_pct = 0.0;
};

// Histogram JS against the truth, moment errors averaged over the two
// coordinates against the grid-truth moments, and the percentage of members
// outside the physical bounds.
SkillReport skill_report(const Ensemble& analysis_ens,
                         const GridPosterior& truth);

// Draws n members from the grid masses (cell centers); used as an
// exact-sampler reference for Monte Carlo noise floors.
Ensemble sample_grid_posterior(const GridPosterior& g, int n,
                               RandomStream& rng);

}  // namespace ctf
