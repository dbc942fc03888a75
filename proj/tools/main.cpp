// Command-line driver. Links the shared library through its C interface.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "ctf/ctf_c.h"

namespace {

void print_line(const char* line, void* /*user_data*/) {
  std::printf("%s\n", line);
}

int exit_code_of(ctf_status status) {
  switch (status) {
    case CTF_OK:
      return 0;
    case CTF_ERR_VALIDATION:
      return 1;
    case CTF_ERR_CONFIG:
      return 2;
    default:
      return 3;
  }
}

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int threads = 0;
  bool has_threads = false;
};

void add_common_options(CLI::App* cmd, CommonOptions* opts) {
  cmd->add_option("--config", opts->config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts->out_dir, "output directory override");
  cmd->add_option("--seed", opts->seed, "master seed override")
      ->each([opts](const std::string&) { opts->has_seed = true; });
  cmd->add_option("--threads", opts->threads, "worker thread count")
      ->each([opts](const std::string&) { opts->has_threads = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conjugate transform filtering experiments"};
  app.require_subcommand(1);

  CommonOptions opts;
  const char* subcommands[] = {"sweep", "innovation", "example", "validate"};
  const char* descriptions[] = {
      "filter-skill sweep over the (rho, r) parameter grid",
      "fixed-observation study of skill versus innovation",
      "single fully serialized trial for rendering",
      "run the library invariant suite"};
  for (int i = 0; i < 4; ++i) {
    CLI::App* cmd = app.add_subcommand(subcommands[i], descriptions[i]);
    add_common_options(cmd, &opts);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (!opts.has_threads) {
    if (const char* env = std::getenv("CTF_THREADS")) {
      char* end = nullptr;
      const long value = std::strtol(env, &end, 10);
      if (end && *end == '\0' && value > 0) {
        opts.threads = static_cast<int>(value);
        opts.has_threads = true;
      } else {
        std::fprintf(stderr, "error: CTF_THREADS must be a positive integer\n");
        return 2;
      }
    }
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  const ctf_status status = ctf_run(
      subcommand.c_str(),
      opts.config_path.empty() ? nullptr : opts.config_path.c_str(),
      opts.out_dir.empty() ? nullptr : opts.out_dir.c_str(), opts.seed,
      opts.has_seed ? 1 : 0, opts.threads, opts.has_threads ? 1 : 0,
      print_line, nullptr);

  if (status == CTF_OK) {
    std::printf("ok\n");
  } else {
    std::fprintf(stderr, "error: %s\n", ctf_last_error());
  }
  return exit_code_of(status);
}
