#include "ctf/ctf_c.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <string>

#include "ctf/baselines.hpp"
#include "ctf/config.hpp"
#include "ctf/ectf.hpp"
#include "ctf/error.hpp"
#include "ctf/experiments.hpp"
#include "ctf/filter.hpp"
#include "ctf/runner.hpp"
#include "ctf/transform.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

ctf_status status_of(const std::exception& e) {
  set_error(e.what());
  if (dynamic_cast<const ctf::ConfigError*>(&e)) return CTF_ERR_CONFIG;
  if (dynamic_cast<const ctf::DomainError*>(&e)) return CTF_ERR_DOMAIN;
  if (dynamic_cast<const ctf::DimensionError*>(&e)) return CTF_ERR_DIMENSION;
  return CTF_ERR_RUNTIME;
}

template <typename Fn>
ctf_status guarded(Fn&& fn) {
  try {
    fn();
    return CTF_OK;
  } catch (const std::exception& e) {
    return status_of(e);
  } catch (...) {
    set_error("unknown error");
    return CTF_ERR_RUNTIME;
  }
}

template <typename Fn>
auto guarded_ptr(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    status_of(e);
    return nullptr;
  } catch (...) {
    set_error("unknown error");
    return nullptr;
  }
}

Eigen::Map<const Eigen::VectorXd> as_vector(const double* data, int n) {
  return Eigen::Map<const Eigen::VectorXd>(data, n);
}

Eigen::MatrixXd from_row_major(const double* data, int rows, int cols) {
  return Eigen::Map<
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                          Eigen::RowMajor>>(data, rows, cols);
}

ctf_status assimilate_2d(const char* state_transform_json, bool identity,
                         const double* members, int n_members, double r,
                         double y, uint64_t seed, double* out_members) {
  if (!members || !out_members) {
    set_error("assimilate: null member array");
    return CTF_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    ctf::Ensemble prior;
    prior.space = ctf::Space::kPhysical;
    prior.members =
        Eigen::Map<const Eigen::MatrixXd>(members, 2, n_members);
    const ctf::ObsOperator h = [](const Eigen::VectorXd& x) {
      return Eigen::VectorXd::Constant(1, x(0));
    };
    const ctf::LikelihoodSampler sampler =
        [r](const Eigen::VectorXd& z, ctf::RandomStream& rng) {
          return Eigen::VectorXd::Constant(
              1, z(z.size() - 1) * std::exp(std::sqrt(r) * rng.normal()));
        };
    const Eigen::VectorXd y_vec = Eigen::VectorXd::Constant(1, y);
    ctf::RandomStream rng(seed);
    ctf::Ensemble ext;
    if (identity) {
      ext = ctf::enkf_assimilate(prior, h, y_vec, sampler, rng);
    } else {
      const ctf::Transform state_t =
          state_transform_json
              ? ctf::Transform::from_json(state_transform_json)
              : ctf::default_state_transform();
      const ctf::Transform f =
          ctf::Transform::partition(state_t, ctf::Transform::exp(1));
      ext = ctf::ectf_assimilate(prior, h, f, ctf::Transform::exp(1), y_vec,
                                 sampler, rng);
    }
    const Eigen::MatrixXd analysis = ext.members.topRows(2);
    std::memcpy(out_members, analysis.data(),
                sizeof(double) * 2 * n_members);
  });
}

}  // namespace

struct ctf_transform {
  ctf::Transform value;
};

struct ctf_filter {
  ctf::FilterState state;
};

extern "C" {

const char* ctf_version(void) { return "0.1.0"; }

const char* ctf_last_error(void) { return g_last_error.c_str(); }

void ctf_string_free(char* s) { delete[] s; }

ctf_transform* ctf_transform_identity(int dim) {
  return guarded_ptr([&]() -> ctf_transform* {
    return new ctf_transform{ctf::Transform::identity(dim)};
  });
}

ctf_transform* ctf_transform_affine(int dim, const double* scale,
                                    const double* shift) {
  return guarded_ptr([&]() -> ctf_transform* {
    if (!scale || !shift) throw ctf::Error("affine: null parameter array");
    return new ctf_transform{
        ctf::Transform::affine(as_vector(scale, dim), as_vector(shift, dim))};
  });
}

ctf_transform* ctf_transform_exp(int dim) {
  return guarded_ptr([&]() -> ctf_transform* {
    return new ctf_transform{ctf::Transform::exp(dim)};
  });
}

ctf_transform* ctf_transform_logistic(int dim) {
  return guarded_ptr([&]() -> ctf_transform* {
    return new ctf_transform{ctf::Transform::logistic(dim)};
  });
}

ctf_transform* ctf_transform_compose(ctf_transform* const* parts,
                                     int n_parts) {
  return guarded_ptr([&]() -> ctf_transform* {
    if (!parts) throw ctf::Error("compose: null part array");
    std::vector<ctf::Transform> list;
    list.reserve(n_parts);
    for (int i = 0; i < n_parts; ++i) {
      if (!parts[i]) throw ctf::Error("compose: null part");
      list.push_back(parts[i]->value);
    }
    return new ctf_transform{ctf::Transform::compose(std::move(list))};
  });
}

ctf_transform* ctf_transform_partition(const ctf_transform* state,
                                       const ctf_transform* obs) {
  return guarded_ptr([&]() -> ctf_transform* {
    if (!state || !obs) throw ctf::Error("partition: null part");
    return new ctf_transform{
        ctf::Transform::partition(state->value, obs->value)};
  });
}

ctf_transform* ctf_transform_from_json(const char* json) {
  return guarded_ptr([&]() -> ctf_transform* {
    if (!json) throw ctf::ConfigError("transform: null JSON");
    return new ctf_transform{ctf::Transform::from_json(json)};
  });
}

char* ctf_transform_to_json(const ctf_transform* t) {
  return guarded_ptr([&]() -> char* {
    if (!t) throw ctf::Error("to_json: null transform");
    const std::string s = t->value.to_json();
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
  });
}

int ctf_transform_dim(const ctf_transform* t) {
  return t ? t->value.dim() : 0;
}

ctf_status ctf_transform_forward(const ctf_transform* t, const double* x,
                                 double* y) {
  if (!t || !x || !y) {
    set_error("forward: null argument");
    return CTF_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    const Eigen::VectorXd out = t->value.forward(as_vector(x, t->value.dim()));
    std::memcpy(y, out.data(), sizeof(double) * out.size());
  });
}

ctf_status ctf_transform_inverse(const ctf_transform* t, const double* y,
                                 double* x) {
  if (!t || !x || !y) {
    set_error("inverse: null argument");
    return CTF_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    const Eigen::VectorXd out = t->value.inverse(as_vector(y, t->value.dim()));
    std::memcpy(x, out.data(), sizeof(double) * out.size());
  });
}

ctf_status ctf_transform_log_det_jacobian_inverse(const ctf_transform* t,
                                                  const double* y,
                                                  double* out) {
  if (!t || !y || !out) {
    set_error("log_det_jacobian_inverse: null argument");
    return CTF_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    *out = t->value.log_det_jacobian_inverse(as_vector(y, t->value.dim()));
  });
}

void ctf_transform_free(ctf_transform* t) { delete t; }

ctf_filter* ctf_filter_create(const ctf_transform* f, int dim,
                              const double* mean, const double* cov) {
  return guarded_ptr([&]() -> ctf_filter* {
    if (!mean || !cov) throw ctf::Error("filter_create: null arrays");
    ctf::Transform transform =
        f ? f->value : ctf::Transform::identity(dim);
    if (transform.dim() != dim) {
      throw ctf::DimensionError("filter_create: transform dimension mismatch");
    }
    ctf::GaussianParams latent{as_vector(mean, dim),
                               from_row_major(cov, dim, dim)};
    return new ctf_filter{{std::move(transform), std::move(latent), 0}};
  });
}

ctf_status ctf_filter_predict(ctf_filter* flt, const double* M,
                              const double* Q) {
  if (!flt || !M || !Q) {
    set_error("filter_predict: null argument");
    return CTF_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    const int d = flt->state.latent.dim();
    flt->state.latent = ctf::ctf_predict(
        flt->state.latent, from_row_major(M, d, d), from_row_major(Q, d, d));
  });
}

ctf_status ctf_filter_update(ctf_filter* flt, int obs_dim, const double* H,
                             const double* R, const double* y_latent) {
  if (!flt || !H || !R || !y_latent) {
    set_error("filter_update: null argument");
    return CTF_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    const int d = flt->state.latent.dim();
    flt->state.latent = ctf::ctf_update(
        flt->state.latent, from_row_major(H, obs_dim, d),
        from_row_major(R, obs_dim, obs_dim), as_vector(y_latent, obs_dim));
    flt->state.k += 1;
  });
}

ctf_status ctf_filter_step(ctf_filter* flt, const ctf_transform* g,
                           int obs_dim, const double* M, const double* Q,
                           const double* H, const double* R,
                           const double* y_physical) {
  if (!flt || !M || !Q || !H || !R || !y_physical) {
    set_error("filter_step: null argument");
    return CTF_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    const int d = flt->state.latent.dim();
    ctf::LatentSSM ssm{from_row_major(M, d, d),
                       from_row_major(Q, d, d),
                       from_row_major(H, obs_dim, d),
                       from_row_major(R, obs_dim, obs_dim),
                       flt->state.transform,
                       g ? g->value : ctf::Transform::identity(obs_dim)};
    flt->state = ctf::ctf_filter_step(flt->state, ssm,
                                      as_vector(y_physical, obs_dim));
  });
}

int ctf_filter_dim(const ctf_filter* flt) {
  return flt ? flt->state.latent.dim() : 0;
}

int ctf_filter_time_index(const ctf_filter* flt) {
  return flt ? flt->state.k : -1;
}

ctf_status ctf_filter_mean(const ctf_filter* flt, double* out) {
  if (!flt || !out) {
    set_error("filter_mean: null argument");
    return CTF_ERR_INVALID_ARGUMENT;
  }
  std::memcpy(out, flt->state.latent.mean.data(),
              sizeof(double) * flt->state.latent.dim());
  return CTF_OK;
}

ctf_status ctf_filter_cov(const ctf_filter* flt, double* out) {
  if (!flt || !out) {
    set_error("filter_cov: null argument");
    return CTF_ERR_INVALID_ARGUMENT;
  }
  const int d = flt->state.latent.dim();
  // Symmetric, so row-major and column-major agree.
  std::memcpy(out, flt->state.latent.cov.data(), sizeof(double) * d * d);
  return CTF_OK;
}

void ctf_filter_free(ctf_filter* flt) { delete flt; }

ctf_status ctf_ectf_assimilate_2d(const char* state_transform_json,
                                  const double* members, int n_members,
                                  double r, double y, uint64_t seed,
                                  double* out_members) {
  return assimilate_2d(state_transform_json, false, members, n_members, r, y,
                       seed, out_members);
}

ctf_status ctf_enkf_assimilate_2d(const double* members, int n_members,
                                  double r, double y, uint64_t seed,
                                  double* out_members) {
  return assimilate_2d(nullptr, true, members, n_members, r, y, seed,
                       out_members);
}

ctf_status ctf_qcef_lr_assimilate_2d(const double* members, int n_members,
                                     const double* latent_mean2,
                                     const double* latent_cov4, double r,
                                     double y, double* out_members) {
  if (!members || !latent_mean2 || !latent_cov4 || !out_members) {
    set_error("qcef_lr_assimilate: null argument");
    return CTF_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    ctf::Ensemble prior;
    prior.space = ctf::Space::kPhysical;
    prior.members =
        Eigen::Map<const Eigen::MatrixXd>(members, 2, n_members);
    ctf::QcefTrialContext ctx;
    ctx.prior_latent.mean = as_vector(latent_mean2, 2);
    ctx.prior_latent.cov = from_row_major(latent_cov4, 2, 2);
    ctx.r = r;
    ctx.y = y;
    const ctf::Ensemble analysis = ctf::qcef_lr_assimilate(prior, ctx);
    std::memcpy(out_members, analysis.members.data(),
                sizeof(double) * 2 * n_members);
  });
}

ctf_status ctf_run(const char* subcommand, const char* config_path,
                   const char* out_dir, uint64_t seed, int has_seed,
                   int threads, int has_threads, ctf_line_callback line_cb,
                   void* user_data) {
  if (!subcommand) {
    set_error("run: null subcommand");
    return CTF_ERR_INVALID_ARGUMENT;
  }
  bool validation_failed = false;
  const ctf_status status = guarded([&]() {
    ctf::RunConfig config = config_path
                                ? ctf::parse_config(config_path)
                                : ctf::RunConfig{};
    config.subcommand = ctf::subcommand_from_name(subcommand);
    if (out_dir) config.out_dir = out_dir;
    if (has_seed) config.seed = seed;
    if (has_threads) {
      if (threads <= 0) throw ctf::ConfigError("run: threads must be positive");
      config.threads = threads;
    }
    const ctf::RunOutcome outcome = ctf::run_config(config);
    if (line_cb) {
      for (const ctf::CheckResult& check : outcome.checks) {
        const std::string line = std::string(check.pass ? "PASS" : "FAIL") +
                                 "  " + check.name + " (" + check.detail + ")";
        line_cb(line.c_str(), user_data);
      }
      for (const std::string& path : outcome.paths) {
        line_cb(("wrote " + path).c_str(), user_data);
      }
    }
    if (!outcome.ok) validation_failed = true;
  });
  if (status != CTF_OK) return status;
  if (validation_failed) {
    set_error("validation suite reported failures");
    return CTF_ERR_VALIDATION;
  }
  return CTF_OK;
}

}  // extern "C"
