/* C interface to the tenring detector. All objects are opaque handles owned
 * by the caller and released with the matching *_free function. Functions
 * returning tr_status report failures through the code and tr_last_error(). */
#ifndef TENRING_TENRING_H
#define TENRING_TENRING_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TR_API __declspec(dllexport)
#else
#define TR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tr_status {
  TR_OK = 0,
  TR_ERR_INVALID_ARGUMENT = 1,
  TR_ERR_DIMENSION_MISMATCH = 2,
  TR_ERR_IO = 3,
  TR_ERR_BAD_MAGIC = 4,
  TR_ERR_TRUNCATED = 5,
  TR_ERR_VERSION_MISMATCH = 6,
  TR_ERR_NON_FINITE = 7,
  TR_ERR_SOLVER_ABORTED = 8,
  TR_ERR_NUMERICAL = 9,
  TR_ERR_INTERNAL = 99
} tr_status;

typedef struct tr_tensor tr_tensor;
typedef struct tr_config tr_config;
typedef struct tr_result tr_result;
typedef struct tr_roc tr_roc;

/* Message for the most recent failure on the calling thread ("" if none). */
TR_API const char* tr_last_error(void);
TR_API const char* tr_version(void);
TR_API const char* tr_status_name(tr_status status);
/* Caps worker threads; 0 restores the default (TENRING_THREADS or hardware). */
TR_API void tr_set_threads(size_t n);
TR_API size_t tr_get_threads(void);
TR_API void tr_string_free(char* s);

/* Tensors: n1 x n2 x n3 doubles with i1 fastest. `data` may be NULL for zeros. */
TR_API tr_status tr_tensor_create(size_t n1, size_t n2, size_t n3, const double* data, tr_tensor** out);
TR_API void tr_tensor_free(tr_tensor* t);
TR_API void tr_tensor_dims(const tr_tensor* t, size_t dims[3]);
TR_API const double* tr_tensor_data(const tr_tensor* t);
TR_API tr_status tr_tensor_read(const char* path, tr_tensor** out);
TR_API tr_status tr_tensor_write(const tr_tensor* t, const char* path);
TR_API tr_status tr_tensor_band_normalize(const tr_tensor* t, tr_tensor** out);

/* Solver configuration. Keys: alpha, beta, ranks ("r1,r2,r3"), phi, psi
 * (penalty names), phi.p, phi.theta, phi.eta, phi.cap (same for psi),
 * transform (fft|dct|identity), gamma_set ("1,2,3"), mu0, mu_max, growth,
 * tol, residual_tol, max_iter, seed, mode. */
TR_API tr_status tr_config_create(tr_config** out);
TR_API void tr_config_free(tr_config* c);
TR_API tr_status tr_config_set(tr_config* c, const char* key, const char* value);
TR_API tr_status tr_config_validate(const tr_config* c);
TR_API tr_status tr_config_to_json(const tr_config* c, char** out);
TR_API tr_status tr_config_from_json(const char* json, tr_config** out);

typedef struct tr_iteration {
  int iteration;
  double error;
  double fidelity_residual;
  double gradient_residual;
  double mu;
  int regularized;
} tr_iteration;

typedef void (*tr_progress_fn)(const tr_iteration* record, void* user);

/* On TR_ERR_SOLVER_ABORTED, *out still receives the partial trace (its
 * tensors are empty). */
TR_API tr_status tr_solve(const tr_tensor* observed, const tr_config* config, tr_progress_fn progress, void* user,
                          tr_result** out);
TR_API void tr_result_free(tr_result* r);
TR_API const tr_tensor* tr_result_background(const tr_result* r);
TR_API const tr_tensor* tr_result_anomaly(const tr_result* r);
/* Detection map stored as an n1 x n2 x 1 tensor. */
TR_API const tr_tensor* tr_result_map(const tr_result* r);
TR_API size_t tr_result_iterations(const tr_result* r);
TR_API int tr_result_converged(const tr_result* r);
TR_API tr_status tr_result_trace(const tr_result* r, size_t index, tr_iteration* out);

typedef struct tr_auc_report {
  double auc_pd_pf;
  double auc_pd_tau;
  double auc_pf_tau;
  double odp;
  double snpr;
  double tdbs;
  int snpr_degenerate;
} tr_auc_report;

typedef struct tr_box {
  double min, q1, median, q3, max;
} tr_box;

typedef struct tr_separability {
  tr_box anomaly;
  tr_box background;
  double gap;
} tr_separability;

/* `map` and `mask` are n1 x n2 x 1. The map is min-max normalised first.
 * `separability` and `roc` may be NULL. */
TR_API tr_status tr_evaluate(const tr_tensor* map, const tr_tensor* mask, tr_auc_report* report,
                             tr_separability* separability, tr_roc** roc);
TR_API void tr_roc_free(tr_roc* roc);
TR_API size_t tr_roc_size(const tr_roc* roc);
TR_API tr_status tr_roc_sample(const tr_roc* roc, size_t index, double* tau, double* pd, double* pf);
TR_API tr_status tr_roc_to_csv(const tr_roc* roc, char** out);

/* Synthetic TR background with planted anomalous tubes; mask is n1 x n2 x 1. */
TR_API tr_status tr_synth(size_t n1, size_t n2, size_t n3, size_t r1, size_t r2, size_t r3, size_t anomalies,
                          double strength, double noise_sigma, uint64_t seed, tr_tensor** scene, tr_tensor** mask);

/* Writes `contents` to a temporary sibling and renames it into place. */
TR_API tr_status tr_write_text_atomic(const char* path, const char* contents);

#ifdef __cplusplus
}
#endif

#endif
