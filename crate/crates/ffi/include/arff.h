#ifndef ARFF_H
#define ARFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Status codes. Values 3 to 5 match the exit codes of the `arff` tool.
 */
typedef enum ArffStatus {
  ARFF_STATUS_OK = 0,
  ARFF_STATUS_NULL_POINTER = 1,
  ARFF_STATUS_INVALID_ARGUMENT = 2,
  ARFF_STATUS_CONFIG = 3,
  ARFF_STATUS_DATA = 4,
  ARFF_STATUS_NUMERICAL = 5,
  ARFF_STATUS_PANIC = 6,
} ArffStatus;

typedef enum ArffActivation {
  ARFF_ACTIVATION_FOURIER = 0,
  ARFF_ACTIVATION_SIGMOID = 1,
} ArffActivation;

/**
 * Raw training or test data.
 */
typedef struct ArffDataset ArffDataset;

/**
 * A trained network with its normalization statistics.
 */
typedef struct ArffModel ArffModel;

/**
 * Sampler settings. Fill with [`arff_sampler_params_default`] and adjust.
 */
typedef struct ArffSamplerParams {
  size_t num_features;
  size_t iterations;
  double delta;
  double gamma;
  double lambda;
  size_t refresh_every;
  uint64_t seed;
  /**
   * Nonzero enables the adaptive proposal covariance.
   */
  uint8_t adaptive_cov;
  size_t burn_in;
  /**
   * Use `INFINITY` for no cap.
   */
  double omega_max;
  enum ArffActivation activation;
} ArffSamplerParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message of the last failure on this thread into `buf`
 * (nul-terminated, truncated to `len`). Returns the full message length
 * without the terminator, or 0 when there is none.
 */
size_t arff_last_error_message(char *buf, size_t len);

/**
 * Builds a dataset from `x` (`n × d`) and `y` (`n × c`). With `c > 1` the
 * rows of `y` must be one-hot.
 */
enum ArffStatus arff_dataset_new(const double *x,
                                 size_t n,
                                 size_t d,
                                 const double *y,
                                 size_t c,
                                 struct ArffDataset **out);

void arff_dataset_free(struct ArffDataset *data);

/**
 * Published defaults for inputs of dimension `dim`.
 */
enum ArffStatus arff_sampler_params_default(size_t dim,
                                            size_t num_features,
                                            struct ArffSamplerParams *out);

/**
 * Normalizes `data`, runs the adaptive sampler and returns a model that
 * accepts raw inputs. `mean_acceptance` may be null.
 */
enum ArffStatus arff_train(const struct ArffDataset *data,
                           const struct ArffSamplerParams *params,
                           struct ArffModel **out,
                           double *mean_acceptance);

void arff_model_free(struct ArffModel *model);

/**
 * Number of hidden nodes, or 0 for a null handle.
 */
size_t arff_model_num_features(const struct ArffModel *model);

/**
 * Raw input dimension, or 0 for a null handle.
 */
size_t arff_model_dim(const struct ArffModel *model);

/**
 * Output columns, or 0 for a null handle.
 */
size_t arff_model_outputs(const struct ArffModel *model);

/**
 * Predicts raw outputs for `x` (`n × d`) into `out` (`n × outputs`).
 */
enum ArffStatus arff_model_predict(const struct ArffModel *model,
                                   const double *x,
                                   size_t n,
                                   size_t d,
                                   double *out,
                                   size_t out_len);

/**
 * Generalization error in normalized output units. `test` holds raw data
 * and is normalized with the model's training statistics.
 */
enum ArffStatus arff_generalization_error(const struct ArffModel *model,
                                          const struct ArffDataset *test,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARFF_H */
