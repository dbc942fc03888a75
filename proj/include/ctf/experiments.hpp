#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ctf/ensemble.hpp"
#include "ctf/oracle.hpp"
#include "ctf/random.hpp"
#include "ctf/transform.hpp"

namespace ctf {

// One Bayesian trial: a latent-Gaussian prior pushed through the state
// transform, with correlation rho and observation-noise variance r in the
// latent space.
struct TrialParams {
  double rho = 0.0;
  double r = 0.0;
  Eigen::Vector2d mu_prior = Eigen::Vector2d::Zero();
  double sigma1 = 1.0;  // latent variance of the first coordinate
  double sigma2 = 1.0;  // latent variance of the second coordinate
  std::uint64_t seed = 0;
};

inline constexpr int kNumFilters = 3;
inline constexpr std::array<const char*, 4> kFilterNames = {
    "enkf", "qcef_lr", "ectf", "oracle"};
inline constexpr std::array<const char*, 4> kMetricNames = {
    "js", "me_mean", "me_std", "bounds_pct"};

// All reports inside one outcome are computed against the same grid truth.
// `oracle_ref` scores an ensemble drawn from the truth itself and serves as
// the Monte Carlo noise floor.
struct TrialOutcome {
  SkillReport enkf;
  SkillReport qcef_lr;
  SkillReport ectf;
  SkillReport oracle_ref;
  double innovation = 0.0;
  Eigen::Vector2d truth = Eigen::Vector2d::Zero();
  double y = 0.0;

  const SkillReport& report(int filter_index) const;
};

// Draws mu ~ U[-1,1]^2 and sigma_{1,2} ~ U[0.05,2] from child stream 0 of
// `trial_stream` and records the stream seed so the trial can be replayed.
TrialParams draw_trial(double rho, double r, const RandomStream& trial_stream);

// Child-stream layout inside a trial (all derived from TrialParams::seed):
//   0: parameter draws   1: prior ensemble   2: truth draw
//   3: observation noise 4: perturbed observations (same seed for each
//      ensemble filter)  5: oracle reference ensemble
//
// When `fixed_y` is finite it replaces the generated observation. All three
// filters consume the same prior ensemble, truth, and observation.
TrialOutcome run_trial(const TrialParams& p, int n_members,
                       const GridSpec& grid, const Transform& state_transform,
                       double fixed_y = std::numeric_limits<double>::quiet_NaN());

struct SweepCell {
  double rho = 0.0;
  double r = 0.0;
  std::array<double, kNumFilters> mean_js{};
  std::array<double, kNumFilters> pct_change_vs_enkf{};
  std::array<double, kNumFilters> p_value{};
  std::array<double, kNumFilters> max_bounds_pct{};
  int n_trials = 0;
};

struct SweepResult {
  std::vector<double> rho_list;
  std::vector<double> r_list;
  int n_trials = 0;
  std::vector<SweepCell> cells;  // row-major: rho outer, r inner

  const SweepCell& cell(std::size_t i_rho, std::size_t i_r) const {
    return cells[i_rho * r_list.size() + i_r];
  }
};

SweepResult sweep(const std::vector<double>& rho_list,
                  const std::vector<double>& r_list, int n_trials,
                  int n_members, const GridSpec& grid,
                  const Transform& state_transform, std::uint64_t master_seed,
                  int threads);

struct InnovationTrialRecord {
  double innovation = 0.0;
  double y = 0.0;
  std::array<SkillReport, 4> reports{};  // enkf, qcef_lr, ectf, oracle
};

struct MedianIqr {
  double median = 0.0;
  double iqr_lo = 0.0;
  double iqr_hi = 0.0;
};

struct InnovationBin {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  // [filter][metric] with the orders of kFilterNames and kMetricNames.
  std::array<std::array<MedianIqr, 4>, 4> stats{};
};

struct InnovationResult {
  double rho = 0.0;
  double r = 0.0;
  std::vector<InnovationTrialRecord> trials;
  std::vector<InnovationBin> bins;  // empty bins are omitted
};

// Trials with fixed observation values cycled from `y_list`, binned into
// `n_bins` equal-count quantile bins of the innovation.
InnovationResult innovation_study(const std::vector<double>& y_list,
                                  double rho, double r, int n_trials,
                                  int n_members, const GridSpec& grid,
                                  const Transform& state_transform,
                                  std::uint64_t master_seed, int threads,
                                  int n_bins = 15);

struct ExampleResult {
  TrialParams params;
  double y = 0.0;
  GridPosterior prior_grid;
  GridPosterior posterior_grid;
  Ensemble prior_ens;  // 2-D physical
  Ensemble enkf_ens;
  Ensemble qcef_ens;
  Ensemble ectf_ens;
  std::array<SkillReport, 4> reports{};  // enkf, qcef_lr, ectf, oracle
};

// Single fully serialized trial for rendering.
ExampleResult example_case(double rho, double r, double y, int n_members,
                           const GridSpec& grid,
                           const Transform& state_transform,
                           std::uint64_t master_seed);

// Two-sided paired t-test p-value. Zero-variance nonzero-mean differences
// give p = 0; all-zero differences give p = 1.
double paired_ttest(const std::vector<double>& diffs);

// The default two-variable state transform: exp on the observed coordinate,
// standard logistic on the unobserved one.
Transform default_state_transform();

}  // namespace ctf
