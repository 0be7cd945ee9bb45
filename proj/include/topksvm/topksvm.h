/*
 * topksvm C interface.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a topksvm_status;
 * on failure topksvm_last_error() holds a one-line message for the calling
 * thread until its next failing call.
 *
 * Classes are addressed by their original label values (int64). Matrices
 * are column-major.
 */
#ifndef TOPKSVM_H
#define TOPKSVM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TOPKSVM_BUILDING)
#    define TOPKSVM_API __declspec(dllexport)
#  else
#    define TOPKSVM_API __declspec(dllimport)
#  endif
#else
#  define TOPKSVM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum topksvm_status {
  TOPKSVM_OK = 0,
  TOPKSVM_ERR_INVALID_ARGUMENT = 1,
  TOPKSVM_ERR_PARSE = 2,
  TOPKSVM_ERR_FORMAT = 3,
  TOPKSVM_ERR_IO = 4,
  TOPKSVM_ERR_DOMAIN = 5,
  TOPKSVM_ERR_BUFFER_TOO_SMALL = 6,
  TOPKSVM_ERR_INTERNAL = 7
} topksvm_status;

typedef enum topksvm_loss {
  TOPKSVM_LOSS_ALPHA = 0, /* max{0, mean of the k largest shifted margins} */
  TOPKSVM_LOSS_BETA = 1   /* mean of the k largest thresholded margins */
} topksvm_loss;

typedef struct topksvm_dataset topksvm_dataset;
typedef struct topksvm_model topksvm_model;

typedef struct topksvm_train_config {
  topksvm_loss loss;
  size_t k;
  double lambda;
  double epsilon;
  size_t max_epochs;
  uint64_t seed;
} topksvm_train_config;

typedef struct topksvm_train_report {
  size_t epochs_run;
  double primal_objective;
  double dual_objective;
  double relative_gap;
  double wall_time;
  int converged;
  size_t skipped_examples;
  size_t projection_fallbacks;
  double max_weight_drift;
} topksvm_train_report;

typedef struct topksvm_projection_info {
  double t;
  double u;
  int fallback;
} topksvm_projection_info;

typedef enum topksvm_bench_method {
  TOPKSVM_BENCH_KNAPSACK = 0,
  TOPKSVM_BENCH_TOPK_SIMPLEX = 1
} topksvm_bench_method;

typedef struct topksvm_bench_row {
  size_t dim;
  size_t k;
  topksvm_bench_method method;
  double seconds;
} topksvm_bench_row;

TOPKSVM_API const char* topksvm_version(void);
TOPKSVM_API const char* topksvm_last_error(void);
TOPKSVM_API const char* topksvm_status_string(topksvm_status status);

/* Datasets */

TOPKSVM_API topksvm_status topksvm_dataset_read_libsvm(
    const char* path, size_t min_features, topksvm_dataset** out);
/* X is num_features x num_examples, column-major. */
TOPKSVM_API topksvm_status topksvm_dataset_create(
    const double* X, size_t num_features, size_t num_examples,
    const int64_t* labels, topksvm_dataset** out);
TOPKSVM_API void topksvm_dataset_free(topksvm_dataset* data);
TOPKSVM_API size_t topksvm_dataset_num_examples(const topksvm_dataset* data);
TOPKSVM_API size_t topksvm_dataset_num_features(const topksvm_dataset* data);
TOPKSVM_API size_t topksvm_dataset_num_classes(const topksvm_dataset* data);

/* Training */

/* Defaults: alpha loss, k = 1, lambda = 1, epsilon = 1e-3,
 * max_epochs = 300, seed = 42. */
TOPKSVM_API void topksvm_train_config_init(topksvm_train_config* config);
/* report may be NULL. */
TOPKSVM_API topksvm_status topksvm_train(const topksvm_dataset* data,
                                         const topksvm_train_config* config,
                                         topksvm_model** out,
                                         topksvm_train_report* report);

/* Models */

TOPKSVM_API topksvm_status topksvm_model_save(const topksvm_model* model,
                                              const char* path);
TOPKSVM_API topksvm_status topksvm_model_load(const char* path,
                                              topksvm_model** out);
TOPKSVM_API void topksvm_model_free(topksvm_model* model);
TOPKSVM_API size_t topksvm_model_num_classes(const topksvm_model* model);
TOPKSVM_API size_t topksvm_model_num_features(const topksvm_model* model);
TOPKSVM_API size_t topksvm_model_k(const topksvm_model* model);
TOPKSVM_API double topksvm_model_lambda(const topksvm_model* model);
TOPKSVM_API topksvm_loss topksvm_model_loss(const topksvm_model* model);
/* W, num_features x num_classes, column-major. */
TOPKSVM_API topksvm_status topksvm_model_weights(const topksvm_model* model,
                                                 double* out, size_t capacity);
TOPKSVM_API topksvm_status topksvm_model_label_values(
    const topksvm_model* model, int64_t* out, size_t capacity);

/* Inference */

/* num_classes x num_examples scores, column-major. */
TOPKSVM_API topksvm_status topksvm_predict_scores(const topksvm_model* model,
                                                  const topksvm_dataset* data,
                                                  double* out,
                                                  size_t capacity);
/* For each example the `top` labels by descending score (ties by class
 * order), written example-major: out[i * top + r]. top <= num_classes. */
TOPKSVM_API topksvm_status topksvm_rank_labels(const topksvm_model* model,
                                               const topksvm_dataset* data,
                                               size_t top, int64_t* out,
                                               size_t capacity);
/* Top-k accuracy in percent for each ks[q]. */
TOPKSVM_API topksvm_status topksvm_topk_accuracy(const topksvm_model* model,
                                                 const topksvm_dataset* data,
                                                 const size_t* ks, size_t nks,
                                                 double* out);

/* Projections. x receives d values; info may be NULL. */

TOPKSVM_API topksvm_status topksvm_project_knapsack(
    const double* a, size_t d, double lower, double upper, double rhs,
    double* x, topksvm_projection_info* info);
TOPKSVM_API topksvm_status topksvm_project_topk_cone(
    const double* a, size_t d, size_t k, double rho, double* x,
    topksvm_projection_info* info);
TOPKSVM_API topksvm_status topksvm_project_topk_simplex(
    const double* a, size_t d, size_t k, double r, double rho, double* x,
    topksvm_projection_info* info);
TOPKSVM_API topksvm_status topksvm_project_topk_box(
    const double* a, size_t d, size_t k, double r, double rho, double* x,
    topksvm_projection_info* info);

/* Projection timing. Needs capacity >= 2 * ndims * nks rows. */
TOPKSVM_API topksvm_status topksvm_bench_proj(
    const size_t* dims, size_t ndims, const size_t* ks, size_t nks,
    size_t samples, uint64_t seed, topksvm_bench_row* rows, size_t capacity,
    size_t* count);

#ifdef __cplusplus
}
#endif

#endif /* TOPKSVM_H */
