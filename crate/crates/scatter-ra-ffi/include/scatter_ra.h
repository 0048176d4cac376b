#ifndef SCATTER_RA_H
#define SCATTER_RA_H

/* Generated by cbindgen from scatter-ra-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Anything but `Ok` leaves a message in
 * [`scatter_ra_last_error`].
 */
typedef enum {
  /**
   * The call succeeded.
   */
  SCATTER_RA_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SCATTER_RA_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  SCATTER_RA_STATUS_INVALID_UTF8 = 2,
  /**
   * The operating system reported an I/O failure.
   */
  SCATTER_RA_STATUS_IO = 3,
  /**
   * A file or buffer does not have the expected format.
   */
  SCATTER_RA_STATUS_BAD_FORMAT = 4,
  /**
   * Buffer or matrix dimensions do not match what the operation needs.
   */
  SCATTER_RA_STATUS_BAD_DIMENSIONS = 5,
  /**
   * A numeric argument violates a domain invariant.
   */
  SCATTER_RA_STATUS_INVALID_VALUE = 6,
  /**
   * Contradictory or incomplete configuration.
   */
  SCATTER_RA_STATUS_BAD_CONFIG = 7,
  /**
   * Artifacts that do not belong together (e.g. model vs. reading shape).
   */
  SCATTER_RA_STATUS_MISMATCH = 8,
} ScatterRaStatus;

/**
 * Opaque handle to a loaded dataset.
 */
typedef struct ScatterRaDataset ScatterRaDataset;

/**
 * Opaque handle to a trained feature-regression model.
 */
typedef struct ScatterRaModel ScatterRaModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread.
 *
 * The pointer stays valid until the next failing scatter-ra call on the same
 * thread. Before any failure it is the empty string, never null.
 */
const char *scatter_ra_last_error(void);

/**
 * Crate version as a static NUL-terminated string; never freed by the caller.
 */
const char *scatter_ra_version(void);

/**
 * Number of sensor channels a raw intensity buffer must carry.
 */
size_t scatter_ra_sensor_count(void);

/**
 * Receptive field of a stacked dilated-convolution network: twice the sum of
 * `(kernel_size - 1) * base^level` over all levels.
 *
 * # Safety
 * `out_rf` must point to writable memory for one `uint64_t`.
 */
ScatterRaStatus scatter_ra_receptive_field(uint64_t kernel_size,
                                           uint32_t levels,
                                           uint64_t dilation_base,
                                           uint64_t *out_rf);

/**
 * Closed-form baseline Ra of one raw reading.
 *
 * `data` is channel-major `uint8_t` intensities, [`scatter_ra_sensor_count`]
 * channels of `timesteps` values each. `step_um` is the spatial distance
 * between timesteps (0.8 in the reference sensor), `theta` the row-threshold
 * rank (2 by default in the pipeline) and `cutoff_um` the waviness cutoff
 * wavelength (80 by default).
 *
 * # Safety
 * `data` must point to `scatter_ra_sensor_count() * timesteps` readable
 * bytes and `out_ra_um` to one writable `double`.
 */
ScatterRaStatus scatter_ra_baseline(const uint8_t *data,
                                    size_t timesteps,
                                    double step_um,
                                    size_t theta,
                                    double cutoff_um,
                                    double *out_ra_um);

/**
 * Loads a dataset directory (as written by the `simulate` command) into an
 * opaque handle. On success `*out` owns the dataset; release it with
 * [`scatter_ra_dataset_free`].
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer slot.
 */
ScatterRaStatus scatter_ra_dataset_load(const char *path, ScatterRaDataset **out);

/**
 * Releases a dataset handle. Null is a no-op.
 *
 * # Safety
 * `ds` must be a pointer returned by [`scatter_ra_dataset_load`] that has
 * not been freed yet.
 */
void scatter_ra_dataset_free(ScatterRaDataset *ds);

/**
 * Number of steel samples in the dataset.
 *
 * # Safety
 * `ds` must be a live dataset handle and `out` a writable `size_t` slot.
 */
ScatterRaStatus scatter_ra_dataset_sample_count(const ScatterRaDataset *ds, size_t *out);

/**
 * Total number of laser readings across all samples.
 *
 * # Safety
 * `ds` must be a live dataset handle and `out` a writable `size_t` slot.
 */
ScatterRaStatus scatter_ra_dataset_reading_count(const ScatterRaDataset *ds, size_t *out);

/**
 * Loads a trained-model JSON file (as written by the `train` command, or the
 * bare model object) into an opaque handle. Release it with
 * [`scatter_ra_model_free`].
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer slot.
 */
ScatterRaStatus scatter_ra_model_load(const char *path, ScatterRaModel **out);

/**
 * Releases a model handle. Null is a no-op.
 *
 * # Safety
 * `model` must be a pointer returned by [`scatter_ra_model_load`] that has
 * not been freed yet.
 */
void scatter_ra_model_free(ScatterRaModel *model);

/**
 * Number of features the model's extractor produces (= ridge weights).
 *
 * # Safety
 * `model` must be a live model handle and `out` a writable `size_t` slot.
 */
ScatterRaStatus scatter_ra_model_feature_count(const ScatterRaModel *model, size_t *out);

/**
 * Predicts Ra for one raw reading with a trained model: threshold with the
 * model's rank, z-score with its train statistics, extract features, apply
 * the ridge weights.
 *
 * `data` is channel-major as in [`scatter_ra_baseline`]; `timesteps` must
 * match the length the extractor was fitted for.
 *
 * # Safety
 * `data` must point to `scatter_ra_sensor_count() * timesteps` readable
 * bytes and `out_ra_um` to one writable `double`.
 */
ScatterRaStatus scatter_ra_model_predict(const ScatterRaModel *model,
                                         const uint8_t *data,
                                         size_t timesteps,
                                         double *out_ra_um);

/**
 * Scores a trained model on the held-out split recorded inside it, writing
 * the root-mean-square error over those readings.
 *
 * # Safety
 * `model` and `ds` must be live handles and `out_rmse_um` a writable
 * `double` slot.
 */
ScatterRaStatus scatter_ra_model_evaluate(const ScatterRaModel *model,
                                          const ScatterRaDataset *ds,
                                          double *out_rmse_um);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCATTER_RA_H */
