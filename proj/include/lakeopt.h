/* lakeopt C API: surrogate-based sensitivity analysis and monthly runoff
 * planning for terminal-lake water balance management.
 *
 * All functions return LAKEOPT_OK on success; on failure they return a status
 * code and leave a human-readable message retrievable (per thread) through
 * lakeopt_last_error(). Objects returned through out-parameters are owned by
 * the caller and released with the matching *_free function; strings with
 * lakeopt_string_free.
 */
#ifndef LAKEOPT_H
#define LAKEOPT_H

#include <stdint.h>

#if defined(_WIN32)
#define LAKEOPT_API __declspec(dllexport)
#else
#define LAKEOPT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lakeopt_status {
  LAKEOPT_OK = 0,
  LAKEOPT_E_INVALID = 1,   /* bad arguments or configuration */
  LAKEOPT_E_IO = 2,        /* file system failure */
  LAKEOPT_E_SCHEMA = 3,    /* missing or unknown column/field */
  LAKEOPT_E_PARSE = 4,     /* malformed cell, number, or document */
  LAKEOPT_E_INTEGRITY = 5, /* well-formed input violating invariants */
  LAKEOPT_E_LOOKUP = 6,    /* unknown variable or factor name */
  LAKEOPT_E_NUMERIC = 7,   /* divergence, constant output, degenerate range */
  LAKEOPT_E_INTERNAL = 8
} lakeopt_status;

typedef struct lakeopt_dataset lakeopt_dataset; /* monthly time series */
typedef struct lakeopt_model lakeopt_model;     /* trained meta-model */

LAKEOPT_API const char* lakeopt_version(void);

/* Message for the most recent failing call on this thread; never NULL. */
LAKEOPT_API const char* lakeopt_last_error(void);

/* ---- datasets ---------------------------------------------------------- */

/* CSV header: year,month,P,R,G,E,Ur,Ug,H[,Hcon]. */
LAKEOPT_API lakeopt_status lakeopt_dataset_load_csv(const char* path,
                                                    lakeopt_dataset** out);
LAKEOPT_API lakeopt_status lakeopt_dataset_save_csv(const lakeopt_dataset* ds,
                                                    const char* path);

/* Deterministic synthetic series with a planted level function (G and R
 * dominant). target_noise scales the level noise term; 0 = noiseless. */
LAKEOPT_API lakeopt_status lakeopt_dataset_synthesize(int n_years, int start_year,
                                                      uint64_t seed,
                                                      double target_noise,
                                                      lakeopt_dataset** out);

/* Per-variable min/max/mean/std as a JSON document. */
LAKEOPT_API lakeopt_status lakeopt_dataset_stats_json(const lakeopt_dataset* ds,
                                                      char** json);

LAKEOPT_API long lakeopt_dataset_size(const lakeopt_dataset* ds);
LAKEOPT_API void lakeopt_dataset_free(lakeopt_dataset* ds);

/* ---- models ------------------------------------------------------------ */

LAKEOPT_API lakeopt_status lakeopt_model_load(const char* path, lakeopt_model** out);
LAKEOPT_API lakeopt_status lakeopt_model_save(const lakeopt_model* m,
                                              const char* path);

/* x is a standardized input vector of length lakeopt_model_input_size(). */
LAKEOPT_API lakeopt_status lakeopt_model_forward(const lakeopt_model* m,
                                                 const double* x, int n, double* y);
LAKEOPT_API lakeopt_status lakeopt_model_input_gradient(const lakeopt_model* m,
                                                        const double* x, int n,
                                                        double* grad);
LAKEOPT_API int lakeopt_model_input_size(const lakeopt_model* m);
LAKEOPT_API void lakeopt_model_free(lakeopt_model* m);

/* Trains a meta-model on the dataset. target "H" fits the lake level from
 * P,R,G,E,Ur,Ug; target "R" fits runoff from H,P,G,E,Ur,Ug. config_json may
 * be NULL/empty or override {hidden_sizes, epochs, learning_rate, batch_size,
 * seed, validation_fraction, weight_init_scale, early_stop_patience}.
 * report_json (optional) receives the training report. */
LAKEOPT_API lakeopt_status lakeopt_train(const lakeopt_dataset* ds,
                                         const char* target,
                                         const char* config_json,
                                         lakeopt_model** out_model,
                                         char** report_json);

/* ---- analysis ---------------------------------------------------------- */

/* method "sobol": params {initial_sample_size, growth_factor, tolerance,
 * max_sample_size, seed, threads}; method "morris": params {levels,
 * trajectories, seed, threads}. params_json may be NULL/empty. */
LAKEOPT_API lakeopt_status lakeopt_sensitivity(const lakeopt_model* m,
                                               const char* method,
                                               const char* params_json,
                                               char** result_json);

/* resolution x resolution predictions over two inputs, others held at
 * fixed_value. */
LAKEOPT_API lakeopt_status lakeopt_surface_grid(const lakeopt_model* m,
                                                const char* var_i, const char* var_j,
                                                double fixed_value, int resolution,
                                                char** json);

/* Monthly runoff maximization for a trained runoff model ("R" target) under
 * the level pattern of the configured reference year. method: "ga",
 * "pattern_search", or "nlp". config_json (optional) uses the pipeline
 * configuration schema. */
LAKEOPT_API lakeopt_status lakeopt_optimize_monthly(const lakeopt_model* runoff_model,
                                                    const lakeopt_dataset* ds,
                                                    const char* method,
                                                    const char* config_json,
                                                    char** plan_json);

/* Full two-stage run: level model + sensitivity screening, then per-month
 * runoff maximization with every configured optimizer. */
LAKEOPT_API lakeopt_status lakeopt_run_pipeline(const lakeopt_dataset* ds,
                                                const char* config_json,
                                                char** result_json);

LAKEOPT_API void lakeopt_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* LAKEOPT_H */
