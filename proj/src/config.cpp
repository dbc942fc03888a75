#include "ctf/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ctf/error.hpp"

namespace ctf {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError("config: unknown key \"" + where + it.key() + "\"");
    }
  }
}

double require_positive(const json& j, const char* field, double value) {
  (void)j;
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string("config: field \"") + field +
                      "\" must be positive and finite");
  }
  return value;
}

int require_positive_int(const char* field, int value) {
  if (value <= 0) {
    throw ConfigError(std::string("config: field \"") + field +
                      "\" must be a positive integer");
  }
  return value;
}

std::pair<int, int> line_col_of_offset(const std::string& text,
                                       std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// The observed coordinate must behave as exp(x) so the lognormal observation
// model and the closed-form quantile cdfs apply.
void check_observed_coordinate(const Transform& t) {
  const CoordInterval dom = t.domain(0);
  bool acts_as_exp = dom.lower == 0.0 && std::isinf(dom.upper);
  if (acts_as_exp) {
    for (double x : {-1.0, 0.0, 1.3}) {
      const double expected = std::exp(x);
      if (std::abs(t.forward_coord(0, x) - expected) >
          1e-12 * std::max(1.0, expected)) {
        acts_as_exp = false;
        break;
      }
    }
  }
  if (!acts_as_exp) {
    throw ConfigError(
        "config: field \"state_transform\": the observed coordinate must act "
        "as exp(x) (lognormal observation model)");
  }
}

GridSpec parse_grid(const json& j, const Transform& state_transform) {
  GridSpec grid = RunConfig::default_experiment_grid();
  reject_unknown_keys(j,
                      {"z1_min", "z1_max", "n_z1", "z1_spacing", "z2_min",
                       "z2_max", "n_z2"},
                      "grid.");
  if (j.contains("z1_min")) grid.z1_min = j["z1_min"].get<double>();
  if (j.contains("z1_max")) grid.z1_max = j["z1_max"].get<double>();
  if (j.contains("n_z1")) grid.n_z1 = j["n_z1"].get<int>();
  if (j.contains("z2_min")) grid.z2_min = j["z2_min"].get<double>();
  if (j.contains("z2_max")) grid.z2_max = j["z2_max"].get<double>();
  if (j.contains("n_z2")) grid.n_z2 = j["n_z2"].get<int>();
  if (j.contains("z1_spacing")) {
    const std::string s = j["z1_spacing"].get<std::string>();
    if (s == "uniform") {
      grid.z1_spacing = GridSpacing::kUniform;
    } else if (s == "log") {
      grid.z1_spacing = GridSpacing::kLogUniform;
    } else {
      throw ConfigError(
          "config: field \"grid.z1_spacing\" must be \"uniform\" or \"log\"");
    }
  }
  grid.bounds1 = state_transform.domain(0);
  grid.bounds2 = state_transform.domain(1);
  if (grid.n_z1 < 2) throw ConfigError("config: field \"grid.n_z1\" must be >= 2");
  if (grid.n_z2 < 2) throw ConfigError("config: field \"grid.n_z2\" must be >= 2");
  if (!(grid.z1_min < grid.z1_max)) {
    throw ConfigError("config: field \"grid.z1_min\" must be below z1_max");
  }
  if (!(grid.z2_min < grid.z2_max)) {
    throw ConfigError("config: field \"grid.z2_min\" must be below z2_max");
  }
  if (!grid.bounds1.contains(grid.z1_min) ||
      !grid.bounds1.contains(grid.z1_max)) {
    throw ConfigError("config: field \"grid\": z1 range outside physical bounds");
  }
  if (!grid.bounds2.contains(grid.z2_min) ||
      !grid.bounds2.contains(grid.z2_max)) {
    throw ConfigError("config: field \"grid\": z2 range outside physical bounds");
  }
  if (grid.z1_spacing == GridSpacing::kLogUniform && !(grid.z1_min > 0.0)) {
    throw ConfigError(
        "config: field \"grid.z1_spacing\": log spacing requires z1_min > 0");
  }
  return grid;
}

std::vector<double> parse_double_list(const json& j, const char* field,
                                      bool positive_only) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(std::string("config: field \"") + field +
                      "\" must be a nonempty array");
  }
  std::vector<double> out;
  for (const auto& v : j) {
    const double x = v.get<double>();
    if (!std::isfinite(x) || (positive_only && !(x > 0.0))) {
      throw ConfigError(std::string("config: field \"") + field +
                        "\" has an invalid entry");
    }
    out.push_back(x);
  }
  return out;
}

RunConfig from_json(const json& j) {
  if (!j.is_object()) {
    throw ConfigError("config: top-level document must be a JSON object");
  }
  reject_unknown_keys(
      j,
      {"subcommand", "seed", "n_trials", "n_members", "threads", "out_dir",
       "rho_list", "r_list", "y_list", "innovation_rho", "innovation_r",
       "innovation_bins", "example_rho", "example_r", "example_y",
       "state_transform", "grid"},
      "");

  RunConfig c;
  if (!j.contains("subcommand")) {
    throw ConfigError("config: field \"subcommand\" is required");
  }
  c.subcommand = subcommand_from_name(j["subcommand"].get<std::string>());

  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("n_trials")) {
    c.n_trials = require_positive_int("n_trials", j["n_trials"].get<int>());
  }
  if (j.contains("n_members")) {
    c.n_members = require_positive_int("n_members", j["n_members"].get<int>());
  }
  if (j.contains("threads")) {
    c.threads = require_positive_int("threads", j["threads"].get<int>());
  }
  if (j.contains("out_dir")) {
    c.out_dir = j["out_dir"].get<std::string>();
    if (c.out_dir.empty()) {
      throw ConfigError("config: field \"out_dir\" must be nonempty");
    }
  }
  if (j.contains("rho_list")) {
    c.rho_list = parse_double_list(j["rho_list"], "rho_list", false);
    for (double rho : c.rho_list) {
      if (rho < -1.0 || rho > 1.0) {
        throw ConfigError("config: field \"rho_list\" entries must lie in [-1,1]");
      }
    }
  }
  if (j.contains("r_list")) {
    c.r_list = parse_double_list(j["r_list"], "r_list", true);
  }
  if (j.contains("y_list")) {
    c.y_list = parse_double_list(j["y_list"], "y_list", true);
  }
  if (j.contains("innovation_rho")) {
    c.innovation_rho = j["innovation_rho"].get<double>();
    if (c.innovation_rho < -1.0 || c.innovation_rho > 1.0) {
      throw ConfigError("config: field \"innovation_rho\" must lie in [-1,1]");
    }
  }
  if (j.contains("innovation_r")) {
    c.innovation_r =
        require_positive(j, "innovation_r", j["innovation_r"].get<double>());
  }
  if (j.contains("innovation_bins")) {
    c.innovation_bins =
        require_positive_int("innovation_bins", j["innovation_bins"].get<int>());
  }
  if (j.contains("example_rho")) {
    c.example_rho = j["example_rho"].get<double>();
    if (c.example_rho < -1.0 || c.example_rho > 1.0) {
      throw ConfigError("config: field \"example_rho\" must lie in [-1,1]");
    }
  }
  if (j.contains("example_r")) {
    c.example_r =
        require_positive(j, "example_r", j["example_r"].get<double>());
  }
  if (j.contains("example_y")) {
    c.example_y =
        require_positive(j, "example_y", j["example_y"].get<double>());
  }
  if (j.contains("state_transform")) {
    c.state_transform = Transform::from_json(j["state_transform"].dump());
  }
  if (c.state_transform.dim() != 2) {
    throw ConfigError(
        "config: field \"state_transform\" must be two-dimensional");
  }
  check_observed_coordinate(c.state_transform);

  c.grid = parse_grid(j.contains("grid") ? j["grid"] : json::object(),
                      c.state_transform);
  return c;
}

}  // namespace

const char* subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::kSweep:
      return "sweep";
    case Subcommand::kInnovation:
      return "innovation";
    case Subcommand::kExample:
      return "example";
    case Subcommand::kValidate:
      return "validate";
  }
  return "unknown";
}

Subcommand subcommand_from_name(const std::string& name) {
  if (name == "sweep") return Subcommand::kSweep;
  if (name == "innovation") return Subcommand::kInnovation;
  if (name == "example") return Subcommand::kExample;
  if (name == "validate") return Subcommand::kValidate;
  throw ConfigError("config: field \"subcommand\" has unknown value \"" + name +
                    "\"");
}

GridSpec RunConfig::default_experiment_grid() {
  GridSpec grid;
  grid.z1_spacing = GridSpacing::kLogUniform;
  return grid;
}

RunConfig parse_config_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col_of_offset(text, e.byte);
    throw ConfigError("config: JSON parse error at line " +
                      std::to_string(line) + ", column " + std::to_string(col));
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file \"" + path + "\"");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_string(buffer.str());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["subcommand"] = subcommand_name(c.subcommand);
  j["seed"] = c.seed;
  j["n_trials"] = c.n_trials;
  j["n_members"] = c.n_members;
  j["threads"] = c.threads;
  j["out_dir"] = c.out_dir;
  j["rho_list"] = c.rho_list;
  j["r_list"] = c.r_list;
  j["y_list"] = c.y_list;
  j["innovation_rho"] = c.innovation_rho;
  j["innovation_r"] = c.innovation_r;
  j["innovation_bins"] = c.innovation_bins;
  j["example_rho"] = c.example_rho;
  j["example_r"] = c.example_r;
  j["example_y"] = c.example_y;
  j["state_transform"] = json::parse(c.state_transform.to_json());
  j["grid"] = {
      {"z1_min", c.grid.z1_min},
      {"z1_max", c.grid.z1_max},
      {"n_z1", c.grid.n_z1},
      {"z1_spacing",
       c.grid.z1_spacing == GridSpacing::kLogUniform ? "log" : "uniform"},
      {"z2_min", c.grid.z2_min},
      {"z2_max", c.grid.z2_max},
      {"n_z2", c.grid.n_z2},
  };
  return j.dump(2);
}

}  // namespace ctf
