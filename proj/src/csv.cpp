#include "ctf/csv.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ctf/error.hpp"
#include "ctf/svg.hpp"

namespace ctf {

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open \"" + path + "\" for writing");
  out << content;
  if (!out) throw IoError("write failed for \"" + path + "\"");
}

std::string ensure_out_dir(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory \"" + config.out_dir +
                  "\": " + ec.message());
  }
  return config.out_dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string write_sweep_csv(const SweepResult& result,
                            const std::string& path) {
  std::string body = "rho,r,filter,mean_js,pct_change_vs_enkf,p_value,n_trials\n";
  for (const SweepCell& cell : result.cells) {
    for (int f = 0; f < kNumFilters; ++f) {
      body += format_double(cell.rho) + "," + format_double(cell.r) + "," +
              kFilterNames[f] + "," + format_double(cell.mean_js[f]) + "," +
              format_double(cell.pct_change_vs_enkf[f]) + "," +
              format_double(cell.p_value[f]) + "," +
              std::to_string(cell.n_trials) + "\n";
    }
  }
  write_file(path, body);
  return path;
}

std::string write_innovation_csv(const InnovationResult& result,
                                 const std::string& path) {
  std::string body = "bin_lo,bin_hi,filter,metric,median,iqr_lo,iqr_hi\n";
  for (const InnovationBin& bin : result.bins) {
    for (int f = 0; f < 4; ++f) {
      for (int m = 0; m < 4; ++m) {
        const MedianIqr& s = bin.stats[f][m];
        body += format_double(bin.lo) + "," + format_double(bin.hi) + "," +
                kFilterNames[f] + "," + kMetricNames[m] + "," +
                format_double(s.median) + "," + format_double(s.iqr_lo) + "," +
                format_double(s.iqr_hi) + "\n";
      }
    }
  }
  write_file(path, body);
  return path;
}

namespace {

void append_ensemble_rows(std::string& body, const char* name,
                          const Ensemble& ens) {
  for (int j = 0; j < ens.size(); ++j) {
    body += std::string(name) + "," + format_double(ens.members(0, j)) + "," +
            format_double(ens.members(1, j)) + "\n";
  }
}

std::string marginal_csv(const GridPosterior& prior,
                         const GridPosterior& posterior, int axis) {
  const std::vector<double> nodes =
      axis == 0 ? prior.grid.z1_nodes() : prior.grid.z2_nodes();
  std::string body =
      axis == 0 ? "z1,prior_mass,posterior_mass\n" : "z2,prior_mass,posterior_mass\n";
  const Eigen::VectorXd prior_marg =
      axis == 0 ? prior.masses.rowwise().sum().eval()
                : prior.masses.colwise().sum().transpose().eval();
  const Eigen::VectorXd post_marg =
      axis == 0 ? posterior.masses.rowwise().sum().eval()
                : posterior.masses.colwise().sum().transpose().eval();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    body += format_double(nodes[i]) + "," +
            format_double(prior_marg(static_cast<Eigen::Index>(i))) + "," +
            format_double(post_marg(static_cast<Eigen::Index>(i))) + "\n";
  }
  return body;
}

}  // namespace

std::vector<std::string> write_example_files(const ExampleResult& result,
                                             const RunConfig& config,
                                             const std::string& out_dir) {
  std::vector<std::string> paths;

  std::string ens_body = "filter,z1,z2\n";
  append_ensemble_rows(ens_body, "prior", result.prior_ens);
  append_ensemble_rows(ens_body, kFilterNames[0], result.enkf_ens);
  append_ensemble_rows(ens_body, kFilterNames[1], result.qcef_ens);
  append_ensemble_rows(ens_body, kFilterNames[2], result.ectf_ens);
  paths.push_back(join(out_dir, "example_ensembles.csv"));
  write_file(paths.back(), ens_body);

  paths.push_back(join(out_dir, "example_grid_z1.csv"));
  write_file(paths.back(),
             marginal_csv(result.prior_grid, result.posterior_grid, 0));
  paths.push_back(join(out_dir, "example_grid_z2.csv"));
  write_file(paths.back(),
             marginal_csv(result.prior_grid, result.posterior_grid, 1));

  std::string summary =
      "filter,js,me_mean,me_std,bounds_pct,mean_z1,mean_z2,std_z1,std_z2\n";
  const auto [true_mean, true_std] = grid_moments(result.posterior_grid);
  const Ensemble* ensembles[3] = {&result.enkf_ens, &result.qcef_ens,
                                  &result.ectf_ens};
  for (int f = 0; f < kNumFilters; ++f) {
    const SkillReport& rep = result.reports[f];
    const Ensemble& ens = *ensembles[f];
    const Eigen::Vector2d mean = ens.members.rowwise().mean();
    Eigen::Vector2d var = Eigen::Vector2d::Zero();
    for (int j = 0; j < ens.size(); ++j) {
      const Eigen::Vector2d d = ens.members.col(j) - mean;
      var += d.cwiseProduct(d);
    }
    var /= static_cast<double>(ens.size() - 1);
    summary += std::string(kFilterNames[f]) + "," + format_double(rep.js) +
               "," + format_double(rep.me_mean) + "," +
               format_double(rep.me_std) + "," +
               format_double(rep.bounds_violation_pct) + "," +
               format_double(mean(0)) + "," + format_double(mean(1)) + "," +
               format_double(std::sqrt(var(0))) + "," +
               format_double(std::sqrt(var(1))) + "\n";
  }
  summary += std::string("truth,0,0,0,0,") + format_double(true_mean(0)) +
             "," + format_double(true_mean(1)) + "," +
             format_double(true_std(0)) + "," + format_double(true_std(1)) +
             "\n";
  paths.push_back(join(out_dir, "example_summary.csv"));
  write_file(paths.back(), summary);

  std::string meta = "{\n  \"config\": " + config_to_json(config) +
                     ",\n  \"trial\": {\n    \"rho\": " +
                     format_double(result.params.rho) +
                     ",\n    \"r\": " + format_double(result.params.r) +
                     ",\n    \"y\": " + format_double(result.y) +
                     ",\n    \"mu_prior\": [" +
                     format_double(result.params.mu_prior(0)) + ", " +
                     format_double(result.params.mu_prior(1)) +
                     "],\n    \"sigma1\": " +
                     format_double(result.params.sigma1) +
                     ",\n    \"sigma2\": " +
                     format_double(result.params.sigma2) +
                     ",\n    \"seed\": " + std::to_string(result.params.seed) +
                     "\n  }\n}\n";
  paths.push_back(join(out_dir, "example_meta.json"));
  write_file(paths.back(), meta);

  return paths;
}

std::vector<std::string> write_results(const SweepResult& result,
                                       const RunConfig& config) {
  const std::string dir = ensure_out_dir(config);
  std::vector<std::string> paths;
  paths.push_back(write_sweep_csv(result, join(dir, "sweep.csv")));

  const std::size_t n_rho = result.rho_list.size();
  const std::size_t n_r = result.r_list.size();
  Heatmap js_map{"mean JS divergence (EnKF)", "rho", "r", result.rho_list,
                 result.r_list, Eigen::MatrixXd(n_rho, n_r), false};
  Heatmap qcef_map{"JS change vs EnKF, pct (QCEF-LR)", "rho", "r",
                   result.rho_list, result.r_list,
                   Eigen::MatrixXd(n_rho, n_r), true};
  Heatmap ectf_map{"JS change vs EnKF, pct (ECTF)", "rho", "r",
                   result.rho_list, result.r_list,
                   Eigen::MatrixXd(n_rho, n_r), true};
  for (std::size_t i = 0; i < n_rho; ++i) {
    for (std::size_t j = 0; j < n_r; ++j) {
      const SweepCell& cell = result.cell(i, j);
      js_map.values(i, j) = cell.mean_js[0];
      // Hatch cells whose paired differences are not significant at 95%.
      const double nan = std::numeric_limits<double>::quiet_NaN();
      qcef_map.values(i, j) =
          cell.p_value[1] < 0.05 ? cell.pct_change_vs_enkf[1] : nan;
      ectf_map.values(i, j) =
          cell.p_value[2] < 0.05 ? cell.pct_change_vs_enkf[2] : nan;
    }
  }
  paths.push_back(render_heatmap_svg(js_map, join(dir, "sweep_js_enkf.svg")));
  paths.push_back(
      render_heatmap_svg(qcef_map, join(dir, "sweep_pct_qcef_lr.svg")));
  paths.push_back(
      render_heatmap_svg(ectf_map, join(dir, "sweep_pct_ectf.svg")));
  return paths;
}

std::vector<std::string> write_results(const InnovationResult& result,
                                       const RunConfig& config) {
  const std::string dir = ensure_out_dir(config);
  std::vector<std::string> paths;
  paths.push_back(
      write_innovation_csv(result, join(dir, "innovation.csv")));

  const char* colors[4] = {"#3b3b3b", "#2b6cb0", "#c53030", "#718096"};
  for (int m = 0; m < 4; ++m) {
    LineChart chart;
    chart.title = std::string("median ") + kMetricNames[m] + " vs innovation";
    chart.x_label = "innovation d";
    chart.y_label = kMetricNames[m];
    for (int f = 0; f < 4; ++f) {
      LineSeries s;
      s.name = kFilterNames[f];
      s.color = colors[f];
      for (const InnovationBin& bin : result.bins) {
        s.x.push_back(0.5 * (bin.lo + bin.hi));
        s.y.push_back(bin.stats[f][m].median);
        s.band_lo.push_back(bin.stats[f][m].iqr_lo);
        s.band_hi.push_back(bin.stats[f][m].iqr_hi);
      }
      chart.series.push_back(std::move(s));
    }
    paths.push_back(render_lines_svg(
        chart, join(dir, std::string("innovation_") + kMetricNames[m] + ".svg")));
  }
  return paths;
}

std::vector<std::string> write_results(const ExampleResult& result,
                                       const RunConfig& config) {
  const std::string dir = ensure_out_dir(config);
  std::vector<std::string> paths = write_example_files(result, config, dir);

  for (int axis = 0; axis < 2; ++axis) {
    const std::vector<double> nodes = axis == 0
                                          ? result.posterior_grid.grid.z1_nodes()
                                          : result.posterior_grid.grid.z2_nodes();
    const Eigen::VectorXd prior_marg =
        axis == 0 ? result.prior_grid.masses.rowwise().sum().eval()
                  : result.prior_grid.masses.colwise().sum().transpose().eval();
    const Eigen::VectorXd post_marg =
        axis == 0
            ? result.posterior_grid.masses.rowwise().sum().eval()
            : result.posterior_grid.masses.colwise().sum().transpose().eval();
    LineChart chart;
    chart.title = axis == 0 ? "z1 marginal masses" : "z2 marginal masses";
    chart.x_label = axis == 0 ? "z1" : "z2";
    chart.y_label = "mass";
    LineSeries prior_series{"prior", "#718096", {}, {}, {}, {}};
    LineSeries post_series{"posterior", "#c53030", {}, {}, {}, {}};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      prior_series.x.push_back(nodes[i]);
      prior_series.y.push_back(prior_marg(static_cast<Eigen::Index>(i)));
      post_series.x.push_back(nodes[i]);
      post_series.y.push_back(post_marg(static_cast<Eigen::Index>(i)));
    }
    chart.series.push_back(std::move(prior_series));
    chart.series.push_back(std::move(post_series));
    paths.push_back(render_lines_svg(
        chart,
        join(dir, axis == 0 ? "example_z1_marginal.svg"
                            : "example_z2_marginal.svg")));
  }
  return paths;
}

}  // namespace ctf
