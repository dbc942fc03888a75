#pragma once

#include <string>
#include <vector>

#include "ctf/config.hpp"
#include "ctf/experiments.hpp"

namespace ctf {

// Doubles printed with 17 significant digits so reruns are byte-comparable.
std::string format_double(double value);

std::string write_sweep_csv(const SweepResult& result, const std::string& path);
std::string write_innovation_csv(const InnovationResult& result,
                                 const std::string& path);

// Raw ensembles, grid marginals, summary statistics, and a metadata echo.
std::vector<std::string> write_example_files(const ExampleResult& result,
                                             const RunConfig& config,
                                             const std::string& out_dir);

// Dispatches on the subcommand, creates the output directory, emits the CSV
// files plus the SVG renderings, and returns the written paths.
std::vector<std::string> write_results(const SweepResult& result,
                                       const RunConfig& config);
std::vector<std::string> write_results(const InnovationResult& result,
                                       const RunConfig& config);
std::vector<std::string> write_results(const ExampleResult& result,
                                       const RunConfig& config);

}  // namespace ctf
