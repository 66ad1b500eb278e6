/*
 * darcysmc: tempered sequential Monte Carlo for the 2D Darcy-flow inverse
 * problem. C interface over opaque handles.
 *
 * Every function returning dsmc_status leaves a message retrievable with
 * dsmc_last_error() on failure (per thread). Handles are freed with their
 * matching *_free function; passing NULL to a free function is a no-op.
 * Buffer-filling functions take a capacity and report the required size in
 * *needed (when non-NULL); a short buffer yields DSMC_ERR_BUFFER.
 */
#ifndef DSMC_DSMC_H
#define DSMC_DSMC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DSMC_API __declspec(dllexport)
#else
#define DSMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dsmc_status {
  DSMC_OK = 0,
  DSMC_ERR_INVALID_ARGUMENT = 1,
  DSMC_ERR_DOMAIN = 2,
  DSMC_ERR_DIMENSION = 3,
  DSMC_ERR_INVALID_FIELD = 4,
  DSMC_ERR_CONFIG = 5,
  DSMC_ERR_NUMERICAL = 6,
  DSMC_ERR_IO = 7,
  DSMC_ERR_CONTRACT = 8,
  DSMC_ERR_BUFFER = 9,
  DSMC_ERR_INTERNAL = 10
} dsmc_status;

typedef enum dsmc_model { DSMC_MODEL_P1 = 0, DSMC_MODEL_P2 = 1 } dsmc_model;

typedef enum dsmc_method { DSMC_METHOD_MONOMIAL = 0, DSMC_METHOD_TRANSPORT = 1, DSMC_METHOD_KALMAN = 2 } dsmc_method;

typedef struct dsmc_config dsmc_config;
typedef struct dsmc_problem dsmc_problem;
typedef struct dsmc_run dsmc_run;
typedef struct dsmc_reference dsmc_reference;
typedef struct dsmc_sweep dsmc_sweep;

DSMC_API const char* dsmc_version(void);
DSMC_API const char* dsmc_last_error(void);
DSMC_API const char* dsmc_status_string(dsmc_status status);

/* ---- configuration ---------------------------------------------------- */

/** Defaults for a model (P1: 24x24 grid, 36 observations; P2: 16x16, 9). */
DSMC_API dsmc_status dsmc_config_default(dsmc_model model, dsmc_config** out);
/** YAML or JSON text; unknown keys and out-of-range values are rejected. */
DSMC_API dsmc_status dsmc_config_parse(const char* text, dsmc_config** out);
DSMC_API dsmc_status dsmc_config_load(const char* path, dsmc_config** out);
/** Overrides a dotted key ("smc.particles", "model", ...) with a YAML scalar
 * and re-resolves defaults. The handle is unchanged on failure. */
DSMC_API dsmc_status dsmc_config_set(dsmc_config* cfg, const char* key, const char* value);
/** Value of a dotted key of the resolved configuration, as JSON text. */
DSMC_API dsmc_status dsmc_config_get(const dsmc_config* cfg, const char* key, char* buf, size_t cap, size_t* needed);
/** Fully resolved configuration as JSON. */
DSMC_API dsmc_status dsmc_config_to_json(const dsmc_config* cfg, char* buf, size_t cap, size_t* needed);
DSMC_API dsmc_status dsmc_config_hash(const dsmc_config* cfg, char* buf, size_t cap, size_t* needed);
DSMC_API dsmc_status dsmc_config_model(const dsmc_config* cfg, dsmc_model* out);
DSMC_API void dsmc_config_free(dsmc_config* cfg);

/* ---- problem ---------------------------------------------------------- */

typedef struct dsmc_problem_info {
  dsmc_model model;
  int nx;
  int ny;
  int observations;
  int parameter_dimension;
  double sigma;
} dsmc_problem_info;

/** Truth on the refined grid, synthetic data, coarse prior and forward model. */
DSMC_API dsmc_status dsmc_problem_create(const dsmc_config* cfg, dsmc_problem** out);
DSMC_API dsmc_status dsmc_problem_info_get(const dsmc_problem* problem, dsmc_problem_info* out);
/** Observed data vector (length = observations). */
DSMC_API dsmc_status dsmc_problem_data(const dsmc_problem* problem, double* out, size_t cap);
/** Flattened coarse truth (length = parameter_dimension). */
DSMC_API dsmc_status dsmc_problem_truth(const dsmc_problem* problem, double* out, size_t cap);
/** truth_fine.csv, truth.csv, observations.csv, config.resolved.json. */
DSMC_API dsmc_status dsmc_problem_export(const dsmc_problem* problem, const char* dir);
DSMC_API void dsmc_problem_free(dsmc_problem* problem);

/* ---- SMC runs --------------------------------------------------------- */

typedef struct dsmc_iteration_info {
  int iteration;
  double phi;
  double ess;
  double log_increment;
  int bisection_iterations;
  double acceptance[3]; /* NaN where no proposals were made */
  long transport_pivots;
  double seconds;
} dsmc_iteration_info;

typedef void (*dsmc_iteration_callback)(const dsmc_iteration_info* info, void* user);

typedef struct dsmc_run_summary {
  dsmc_method method;
  int particles;
  uint64_t seed;
  int completed;
  int iterations;
  int parameter_dimension;
  double log_evidence;
  double seconds;
} dsmc_run_summary;

typedef struct dsmc_metrics {
  double error_field;   /* P1 */
  double error_inside;  /* P2 */
  double error_outside; /* P2 */
  double kl[5];         /* P2, one per channel parameter */
} dsmc_metrics;

/** Runs tempered SMC. particles <= 0 and seed == NULL select the configured
 * values; threads come from the configuration. A run that stops early still
 * returns its handle in *out (with the ensemble reached so far) together
 * with the failure status. */
DSMC_API dsmc_status dsmc_run_smc(const dsmc_problem* problem, dsmc_method method, int particles,
                                  const uint64_t* seed, dsmc_iteration_callback callback, void* user,
                                  dsmc_run** out);
DSMC_API dsmc_status dsmc_run_summary_get(const dsmc_run* run, dsmc_run_summary* out);
DSMC_API dsmc_status dsmc_run_iteration(const dsmc_run* run, int index, dsmc_iteration_info* out);
/** Final particles, particle after particle (parameter_dimension x particles, column-major). */
DSMC_API dsmc_status dsmc_run_ensemble(const dsmc_run* run, double* out, size_t cap);
/** Error and KL metrics against a reference archive. */
DSMC_API dsmc_status dsmc_run_metrics(const dsmc_run* run, const dsmc_reference* reference, dsmc_metrics* out);
/** run.jsonl, ensemble_final.csv, metrics.csv, config.resolved.json and, for
 * P2 with a reference, marginal_d1.csv ... marginal_d5.csv. reference may be NULL. */
DSMC_API dsmc_status dsmc_run_export(const dsmc_run* run, const dsmc_reference* reference, const char* dir);
DSMC_API void dsmc_run_free(dsmc_run* run);

/* ---- reference posterior ---------------------------------------------- */

/** Long pcn (P1) or Metropolis-within-Gibbs (P2) chains at full likelihood. */
DSMC_API dsmc_status dsmc_reference_run(const dsmc_problem* problem, const uint64_t* seed, dsmc_reference** out);
/** Reads reference_samples.csv from a directory written by dsmc_reference_export. */
DSMC_API dsmc_status dsmc_reference_load(const dsmc_problem* problem, const char* dir, dsmc_reference** out);
DSMC_API dsmc_status dsmc_reference_export(const dsmc_reference* reference, const char* dir);
DSMC_API dsmc_status dsmc_reference_size(const dsmc_reference* reference, size_t* samples, size_t* dimension);
/** Samples in archive order (dimension x samples, column-major). */
DSMC_API dsmc_status dsmc_reference_samples(const dsmc_reference* reference, double* out, size_t cap);
/** Modes of the histogram of one flattened coordinate over [lo, hi] after
 * 3-bin smoothing. */
DSMC_API dsmc_status dsmc_reference_mode_count(const dsmc_reference* reference, int coordinate, int bins, double lo,
                                               double hi, int* modes);
DSMC_API void dsmc_reference_free(dsmc_reference* reference);

/* ---- sweeps ----------------------------------------------------------- */

typedef struct dsmc_sweep_row {
  dsmc_method method;
  int particles;
  uint64_t seed;
  int completed;
  int iterations;
  double seconds;
  int has_metrics;
  dsmc_metrics metrics;
  const char* message; /* owned by the sweep handle */
} dsmc_sweep_row;

typedef void (*dsmc_sweep_callback)(const dsmc_sweep_row* row, void* user);

/** Cross product of the configured seeds, sizes and methods. Failing runs
 * are recorded per row. reference may be NULL (no metrics). */
DSMC_API dsmc_status dsmc_sweep_run(const dsmc_problem* problem, const dsmc_reference* reference,
                                    dsmc_sweep_callback callback, void* user, dsmc_sweep** out);
DSMC_API dsmc_status dsmc_sweep_size(const dsmc_sweep* sweep, size_t* rows);
DSMC_API dsmc_status dsmc_sweep_row_get(const dsmc_sweep* sweep, size_t index, dsmc_sweep_row* out);
/** metrics.csv, summary.csv, runs.jsonl, config.resolved.json. */
DSMC_API dsmc_status dsmc_sweep_export(const dsmc_sweep* sweep, const char* dir);
DSMC_API void dsmc_sweep_free(dsmc_sweep* sweep);

/* ---- offline metrics -------------------------------------------------- */

/** Metrics of an exported ensemble (ensemble_final.csv) against an exported
 * reference directory. Histograms use the configured bin count or J/10.
 * out_csv and out may be NULL. */
DSMC_API dsmc_status dsmc_metrics_from_files(const dsmc_problem* problem, const char* ensemble_csv,
                                             const char* reference_dir, const char* out_csv, dsmc_metrics* out);

#ifdef __cplusplus
}
#endif

#endif
