#include "ctf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "ctf/baselines.hpp"
#include "ctf/ectf.hpp"
#include "ctf/error.hpp"
#include "ctf/stats.hpp"

namespace ctf {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Runs fn(0..n_jobs-1), each job writing only its own output slot, so the
// result is independent of the thread count.
void parallel_for(int n_jobs, int threads,
                  const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n_jobs));
  if (threads == 1) {
    for (int i = 0; i < n_jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error = nullptr;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n_jobs) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

Eigen::Matrix2d prior_covariance(const TrialParams& p) {
  Eigen::Matrix2d cov;
  const double off = p.rho * std::sqrt(p.sigma1 * p.sigma2);
  cov << p.sigma1, off, off, p.sigma2;
  return cov;
}

std::array<double, 4> metrics_of(const SkillReport& rep) {
  return {rep.js, rep.me_mean, rep.me_std, rep.bounds_violation_pct};
}

}  // namespace

Transform default_state_transform() {
  return Transform::partition(Transform::exp(1), Transform::logistic(1));
}

const SkillReport& TrialOutcome::report(int filter_index) const {
  switch (filter_index) {
    case 0:
      return enkf;
    case 1:
      return qcef_lr;
    case 2:
      return ectf;
    default:
      return oracle_ref;
  }
}

TrialParams draw_trial(double rho, double r,
                       const RandomStream& trial_stream) {
  RandomStream params_rng = trial_stream.child(0);
  TrialParams p;
  p.rho = rho;
  p.r = r;
  p.mu_prior(0) = params_rng.uniform(-1.0, 1.0);
  p.mu_prior(1) = params_rng.uniform(-1.0, 1.0);
  p.sigma1 = params_rng.uniform(0.05, 2.0);
  p.sigma2 = params_rng.uniform(0.05, 2.0);
  p.seed = trial_stream.seed();
  return p;
}

TrialOutcome run_trial(const TrialParams& p, int n_members,
                       const GridSpec& grid, const Transform& state_transform,
                       double fixed_y) {
  const RandomStream trial_stream(p.seed);

  GaussianParams latent;
  latent.mean = p.mu_prior;
  latent.cov = prior_covariance(p);
  const PushforwardDensity prior{state_transform, latent};

  RandomStream ens_rng = trial_stream.child(1);
  const Ensemble prior_ens = sample_pushforward(prior, n_members, ens_rng);

  RandomStream truth_rng = trial_stream.child(2);
  const Ensemble truth_draw = sample_pushforward(prior, 1, truth_rng);
  const Eigen::Vector2d truth = truth_draw.members.col(0);

  double y = fixed_y;
  if (!std::isfinite(y)) {
    RandomStream obs_rng = trial_stream.child(3);
    y = truth(0) * std::exp(std::sqrt(p.r) * obs_rng.normal());
  }

  const double r = p.r;
  const LikelihoodLogPdf lognormal_lik = [r](double z1, double z2,
                                             double obs) {
    (void)z2;
    const double diff = std::log(obs) - std::log(z1);
    return -0.5 * (kLog2Pi + std::log(r)) - diff * diff / (2.0 * r) -
           std::log(obs);
  };
  const GridPosterior truth_grid = grid_posterior(prior, lognormal_lik, y, grid);

  const double innovation = y - prior_ens.members.row(0).mean();

  const ObsOperator h = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, x(0));
  };
  const LikelihoodSampler sampler = [r](const Eigen::VectorXd& z_ext,
                                        RandomStream& rng) {
    const double hx = z_ext(z_ext.size() - 1);
    return Eigen::VectorXd::Constant(1,
                                     hx * std::exp(std::sqrt(r) * rng.normal()));
  };
  const Eigen::VectorXd y_vec = Eigen::VectorXd::Constant(1, y);

  TrialOutcome out;
  out.truth = truth;
  out.y = y;
  out.innovation = innovation;

  // Both ensemble filters receive identical perturbed-observation streams.
  {
    RandomStream da_rng = trial_stream.child(4);
    const Ensemble ext = enkf_assimilate(prior_ens, h, y_vec, sampler, da_rng);
    Ensemble analysis{ext.members.topRows(2), Space::kPhysical};
    out.enkf = skill_report(analysis, truth_grid);
  }
  {
    const Transform f_ext =
        Transform::partition(state_transform, Transform::exp(1));
    RandomStream da_rng = trial_stream.child(4);
    const Ensemble ext = ectf_assimilate(prior_ens, h, f_ext,
                                         Transform::exp(1), y_vec, sampler,
                                         da_rng);
    Ensemble analysis{ext.members.topRows(2), Space::kPhysical};
    out.ectf = skill_report(analysis, truth_grid);
  }
  {
    QcefTrialContext ctx{latent, p.r, y};
    const Ensemble analysis = qcef_lr_assimilate(prior_ens, ctx);
    out.qcef_lr = skill_report(analysis, truth_grid);
  }
  {
    RandomStream ref_rng = trial_stream.child(5);
    const Ensemble ref = sample_grid_posterior(truth_grid, n_members, ref_rng);
    out.oracle_ref = skill_report(ref, truth_grid);
  }
  return out;
}

double paired_ttest(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  if (n < 2) throw DimensionError("paired_ttest: need at least 2 differences");
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double d : diffs) var += (d - mean) * (d - mean);
  var /= static_cast<double>(n - 1);
  if (var == 0.0) return mean == 0.0 ? 1.0 : 0.0;
  const double t = mean / std::sqrt(var / static_cast<double>(n));
  return stats::student_t_two_sided_p(t, static_cast<double>(n - 1));
}

SweepResult sweep(const std::vector<double>& rho_list,
                  const std::vector<double>& r_list, int n_trials,
                  int n_members, const GridSpec& grid,
                  const Transform& state_transform, std::uint64_t master_seed,
                  int threads) {
  if (rho_list.empty() || r_list.empty()) {
    throw DimensionError("sweep: rho and r lists must be nonempty");
  }
  if (n_trials < 1) throw DimensionError("sweep: need at least 1 trial");

  const RandomStream root(master_seed);
  const int n_cells = static_cast<int>(rho_list.size() * r_list.size());
  const int n_jobs = n_cells * n_trials;
  std::vector<TrialOutcome> outcomes(n_jobs);

  parallel_for(n_jobs, threads, [&](int job) {
    const int cell = job / n_trials;
    const int t = job % n_trials;
    const double rho = rho_list[cell / r_list.size()];
    const double r = r_list[cell % r_list.size()];
    const RandomStream trial_stream = root.child(cell).child(t);
    const TrialParams params = draw_trial(rho, r, trial_stream);
    outcomes[job] = run_trial(params, n_members, grid, state_transform);
  });

  SweepResult result;
  result.rho_list = rho_list;
  result.r_list = r_list;
  result.n_trials = n_trials;
  result.cells.resize(n_cells);
  for (int cell = 0; cell < n_cells; ++cell) {
    SweepCell& c = result.cells[cell];
    c.rho = rho_list[cell / r_list.size()];
    c.r = r_list[cell % r_list.size()];
    c.n_trials = n_trials;
    std::array<std::vector<double>, kNumFilters> js;
    for (auto& v : js) v.reserve(n_trials);
    for (int t = 0; t < n_trials; ++t) {
      const TrialOutcome& o = outcomes[cell * n_trials + t];
      for (int f = 0; f < kNumFilters; ++f) {
        js[f].push_back(o.report(f).js);
        c.max_bounds_pct[f] =
            std::max(c.max_bounds_pct[f], o.report(f).bounds_violation_pct);
      }
    }
    for (int f = 0; f < kNumFilters; ++f) {
      double mean = 0.0;
      for (double v : js[f]) mean += v;
      c.mean_js[f] = mean / static_cast<double>(n_trials);
    }
    for (int f = 0; f < kNumFilters; ++f) {
      c.pct_change_vs_enkf[f] =
          100.0 * (c.mean_js[f] - c.mean_js[0]) / c.mean_js[0];
      std::vector<double> diffs(n_trials);
      for (int t = 0; t < n_trials; ++t) diffs[t] = js[f][t] - js[0][t];
      // A single trial leaves the t statistic undefined; report 1.
      c.p_value[f] = n_trials < 2 ? 1.0 : paired_ttest(diffs);
    }
  }
  return result;
}

InnovationResult innovation_study(const std::vector<double>& y_list,
                                  double rho, double r, int n_trials,
                                  int n_members, const GridSpec& grid,
                                  const Transform& state_transform,
                                  std::uint64_t master_seed, int threads,
                                  int n_bins) {
  if (y_list.empty()) {
    throw DimensionError("innovation_study: y list must be nonempty");
  }
  if (n_trials < 2 || n_bins < 1) {
    throw DimensionError("innovation_study: invalid trial or bin count");
  }

  const RandomStream root(master_seed);
  std::vector<InnovationTrialRecord> records(n_trials);
  parallel_for(n_trials, threads, [&](int t) {
    const double y = y_list[t % y_list.size()];
    const RandomStream trial_stream = root.child(t);
    const TrialParams params = draw_trial(rho, r, trial_stream);
    const TrialOutcome o =
        run_trial(params, n_members, grid, state_transform, y);
    records[t] = {o.innovation, o.y,
                  {o.enkf, o.qcef_lr, o.ectf, o.oracle_ref}};
  });

  InnovationResult result;
  result.rho = rho;
  result.r = r;
  result.trials = records;

  // Equal-count quantile bin edges over the observed innovations.
  std::vector<double> sorted_d(n_trials);
  for (int t = 0; t < n_trials; ++t) sorted_d[t] = records[t].innovation;
  std::sort(sorted_d.begin(), sorted_d.end());
  std::vector<double> edges(n_bins + 1);
  for (int b = 0; b <= n_bins; ++b) {
    const double pos =
        static_cast<double>(b) / n_bins * static_cast<double>(n_trials - 1);
    edges[b] = sorted_d[static_cast<std::size_t>(pos)];
  }
  edges.front() = sorted_d.front();
  edges.back() = sorted_d.back();

  for (int b = 0; b < n_bins; ++b) {
    const double lo = edges[b];
    const double hi = edges[b + 1];
    std::vector<const InnovationTrialRecord*> members;
    for (const auto& rec : records) {
      const bool in_bin = (rec.innovation >= lo) &&
                          (b + 1 == n_bins ? rec.innovation <= hi
                                           : rec.innovation < hi);
      if (in_bin) members.push_back(&rec);
    }
    if (members.empty()) continue;  // missing, not zero
    InnovationBin bin;
    bin.lo = lo;
    bin.hi = hi;
    bin.count = static_cast<int>(members.size());
    for (int f = 0; f < 4; ++f) {
      for (int m = 0; m < 4; ++m) {
        std::vector<double> values;
        values.reserve(members.size());
        for (const auto* rec : members) {
          values.push_back(metrics_of(rec->reports[f])[m]);
        }
        MedianIqr s;
        s.median = stats::median(values);
        const auto q = stats::iqr(values);
        s.iqr_lo = q.first;
        s.iqr_hi = q.second;
        bin.stats[f][m] = s;
      }
    }
    result.bins.push_back(bin);
  }
  return result;
}

ExampleResult example_case(double rho, double r, double y, int n_members,
                           const GridSpec& grid,
                           const Transform& state_transform,
                           std::uint64_t master_seed) {
  const RandomStream root(master_seed);
  const RandomStream trial_stream = root.child(0);
  const TrialParams params = draw_trial(rho, r, trial_stream);

  ExampleResult result;
  result.params = params;
  result.y = y;

  GaussianParams latent;
  latent.mean = params.mu_prior;
  latent.cov = prior_covariance(params);
  const PushforwardDensity prior{state_transform, latent};

  RandomStream ens_rng = trial_stream.child(1);
  result.prior_ens = sample_pushforward(prior, n_members, ens_rng);

  const LikelihoodLogPdf flat = [](double, double, double) { return 0.0; };
  result.prior_grid = grid_posterior(prior, flat, y, grid);

  const TrialOutcome outcome =
      run_trial(params, n_members, grid, state_transform, y);
  result.reports = {outcome.enkf, outcome.qcef_lr, outcome.ectf,
                    outcome.oracle_ref};

  // Re-run the filters to capture the analysis ensembles themselves; streams
  // are rebuilt exactly as inside run_trial.
  const double rr = params.r;
  const ObsOperator h = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, x(0));
  };
  const LikelihoodSampler sampler = [rr](const Eigen::VectorXd& z_ext,
                                         RandomStream& rng) {
    const double hx = z_ext(z_ext.size() - 1);
    return Eigen::VectorXd::Constant(
        1, hx * std::exp(std::sqrt(rr) * rng.normal()));
  };
  const Eigen::VectorXd y_vec = Eigen::VectorXd::Constant(1, y);
  {
    RandomStream da_rng = trial_stream.child(4);
    const Ensemble ext =
        enkf_assimilate(result.prior_ens, h, y_vec, sampler, da_rng);
    result.enkf_ens = Ensemble{ext.members.topRows(2), Space::kPhysical};
  }
  {
    const Transform f_ext =
        Transform::partition(state_transform, Transform::exp(1));
    RandomStream da_rng = trial_stream.child(4);
    const Ensemble ext =
        ectf_assimilate(result.prior_ens, h, f_ext, Transform::exp(1), y_vec,
                        sampler, da_rng);
    result.ectf_ens = Ensemble{ext.members.topRows(2), Space::kPhysical};
  }
  {
    QcefTrialContext ctx{latent, params.r, y};
    result.qcef_ens = qcef_lr_assimilate(result.prior_ens, ctx);
  }

  const LikelihoodLogPdf lognormal_lik = [rr](double z1, double z2,
                                              double obs) {
    (void)z2;
    const double diff = std::log(obs) - std::log(z1);
    return -0.5 * (kLog2Pi + std::log(rr)) - diff * diff / (2.0 * rr) -
           std::log(obs);
  };
  result.posterior_grid = grid_posterior(prior, lognormal_lik, y, grid);
  return result;
}

}  // namespace ctf
