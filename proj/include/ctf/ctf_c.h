/* C interface to the conjugate transform filtering library.
 *
 * All functions set a thread-local message retrievable through
 * ctf_last_error() when they fail. Handle-returning functions yield NULL on
 * failure; status-returning functions yield a ctf_status. Matrices are
 * row-major; member matrices are column blocks (member j starts at
 * data + j * dim).
 */
#ifndef CTF_C_H
#define CTF_C_H

#include <stdint.h>

#if defined(_WIN32)
#define CTF_API __declspec(dllexport)
#else
#define CTF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctf_status {
  CTF_OK = 0,
  CTF_ERR_VALIDATION = 1,
  CTF_ERR_CONFIG = 2,
  CTF_ERR_RUNTIME = 3,
  CTF_ERR_DOMAIN = 4,
  CTF_ERR_DIMENSION = 5,
  CTF_ERR_INVALID_ARGUMENT = 6
} ctf_status;

CTF_API const char* ctf_version(void);
CTF_API const char* ctf_last_error(void);
CTF_API void ctf_string_free(char* s);

/* -------- transforms -------- */

typedef struct ctf_transform ctf_transform;

CTF_API ctf_transform* ctf_transform_identity(int dim);
CTF_API ctf_transform* ctf_transform_affine(int dim, const double* scale,
                                            const double* shift);
CTF_API ctf_transform* ctf_transform_exp(int dim);
CTF_API ctf_transform* ctf_transform_logistic(int dim);
CTF_API ctf_transform* ctf_transform_compose(ctf_transform* const* parts,
                                             int n_parts);
CTF_API ctf_transform* ctf_transform_partition(const ctf_transform* state,
                                               const ctf_transform* obs);
CTF_API ctf_transform* ctf_transform_from_json(const char* json);
/* Returned string must be released with ctf_string_free. */
CTF_API char* ctf_transform_to_json(const ctf_transform* t);
CTF_API int ctf_transform_dim(const ctf_transform* t);
CTF_API ctf_status ctf_transform_forward(const ctf_transform* t,
                                         const double* x, double* y);
CTF_API ctf_status ctf_transform_inverse(const ctf_transform* t,
                                         const double* y, double* x);
CTF_API ctf_status ctf_transform_log_det_jacobian_inverse(
    const ctf_transform* t, const double* y, double* out);
CTF_API void ctf_transform_free(ctf_transform* t);

/* -------- exact conjugate filter -------- */

typedef struct ctf_filter ctf_filter;

/* f may be NULL for the identity transform. cov is dim x dim row-major. */
CTF_API ctf_filter* ctf_filter_create(const ctf_transform* f, int dim,
                                      const double* mean, const double* cov);
CTF_API ctf_status ctf_filter_predict(ctf_filter* flt, const double* M,
                                      const double* Q);
/* H is obs_dim x dim row-major, R obs_dim x obs_dim, y_latent the latent
 * observation g^-1(y). */
CTF_API ctf_status ctf_filter_update(ctf_filter* flt, int obs_dim,
                                     const double* H, const double* R,
                                     const double* y_latent);
/* One predict/update cycle on a physical observation; g maps latent
 * observations to physical space and may be NULL for the identity. */
CTF_API ctf_status ctf_filter_step(ctf_filter* flt, const ctf_transform* g,
                                   int obs_dim, const double* M,
                                   const double* Q, const double* H,
                                   const double* R, const double* y_physical);
CTF_API int ctf_filter_dim(const ctf_filter* flt);
CTF_API int ctf_filter_time_index(const ctf_filter* flt);
CTF_API ctf_status ctf_filter_mean(const ctf_filter* flt, double* out);
CTF_API ctf_status ctf_filter_cov(const ctf_filter* flt, double* out);
CTF_API void ctf_filter_free(ctf_filter* flt);

/* -------- ensemble filters on the two-variable problem -------- */
/* The first state coordinate is observed through a lognormal likelihood of
 * latent variance r. Member matrices hold n columns of length 2. A NULL
 * state_transform_json selects the default (exp, logistic) pair. */

CTF_API ctf_status ctf_ectf_assimilate_2d(const char* state_transform_json,
                                          const double* members, int n_members,
                                          double r, double y, uint64_t seed,
                                          double* out_members);
CTF_API ctf_status ctf_enkf_assimilate_2d(const double* members, int n_members,
                                          double r, double y, uint64_t seed,
                                          double* out_members);
CTF_API ctf_status ctf_qcef_lr_assimilate_2d(const double* members,
                                             int n_members,
                                             const double* latent_mean2,
                                             const double* latent_cov4,
                                             double r, double y,
                                             double* out_members);

/* -------- experiment harness -------- */

typedef void (*ctf_line_callback)(const char* line, void* user_data);

/* Runs one subcommand ("sweep", "innovation", "example", "validate").
 * config_path may be NULL (defaults apply); the subcommand argument
 * overrides the config's own. out_dir, seed, and threads override the config
 * when provided. Progress lines (validation checks, written files) are
 * streamed through line_cb when non-NULL. Returns CTF_OK, or
 * CTF_ERR_VALIDATION when a validation check fails, CTF_ERR_CONFIG for
 * configuration problems, CTF_ERR_RUNTIME otherwise. */
CTF_API ctf_status ctf_run(const char* subcommand, const char* config_path,
                           const char* out_dir, uint64_t seed, int has_seed,
                           int threads, int has_threads,
                           ctf_line_callback line_cb, void* user_data);

#ifdef __cplusplus
}
#endif

#endif /* CTF_C_H */
