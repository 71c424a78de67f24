#ifndef DFRS_H
#define DFRS_H

/* Generated by cbindgen from the dfrs-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Temporal correlation of one sensor's random series.
typedef enum {
  // Fresh independent draw at every snapshot.
  DFRS_CORRELATION_IID_PER_SNAPSHOT = 0,
  // One draw per sensor, repeated across snapshots.
  DFRS_CORRELATION_FIXED_PER_SENSOR = 1,
  // Alternating `+z, -z` pairs.
  DFRS_CORRELATION_ANTITHETIC_PAIR = 2,
} DfrsCorrelation;

// Noise families constructible through [`dfrs_noise_new`].
typedef enum {
  // No noise; parameters ignored.
  DFRS_NOISE_FAMILY_ZERO = 0,
  // Uniform on `[-b, b]`; parameters ignored.
  DFRS_NOISE_FAMILY_UNIFORM = 1,
  // Symmetric two-point on `{-b, +b}`; parameters ignored.
  DFRS_NOISE_FAMILY_RADEMACHER = 2,
  // Zero-mean two-point taking `+param1` and `-param2`.
  DFRS_NOISE_FAMILY_ASYMMETRIC_TWO_POINT = 3,
  // Gaussian with standard deviation `param1`, truncated to `[-b, b]`.
  DFRS_NOISE_FAMILY_TRUNCATED_GAUSSIAN = 4,
  // Raised-cosine density supported on `[-b, b]`; parameters ignored.
  DFRS_NOISE_FAMILY_RAISED_COSINE = 5,
} DfrsNoiseFamily;

// Result of every fallible call in this API.
typedef enum {
  // Success; out-parameters are valid.
  DFRS_STATUS_OK = 0,
  // A required pointer argument was null.
  DFRS_STATUS_NULL_ARGUMENT = 1,
  // A scalar or array argument was rejected by the model.
  DFRS_STATUS_INVALID_ARGUMENT = 2,
  // An array length or label did not match the model's shape.
  DFRS_STATUS_DIMENSION_MISMATCH = 3,
  // A coordinate or value fell outside its admissible interval.
  DFRS_STATUS_OUT_OF_RANGE = 4,
  // A count violated a divisibility requirement of the schedule.
  DFRS_STATUS_DIVISIBILITY = 5,
  // The requested quantity has no closed form for this model.
  DFRS_STATUS_NO_CLOSED_FORM = 6,
  // The noise density is not regular enough for Fisher information.
  DFRS_STATUS_NON_REGULAR_PDF = 7,
  // A wire message or tally violated the transport contract.
  DFRS_STATUS_PROTOCOL = 8,
  // Configuration-file error (not reachable through this API's own
  // calls; present so core statuses map totally).
  DFRS_STATUS_CONFIG = 9,
  // An I/O error from the underlying platform.
  DFRS_STATUS_IO = 10,
  // The library caught an internal panic; state may be stale but the
  // process is intact.
  DFRS_STATUS_PANIC = 11,
} DfrsStatus;

// Sensor deployment handle.
typedef struct DfrsDeployment DfrsDeployment;

// Reconstructed field handle.
typedef struct DfrsEstimate DfrsEstimate;

// Field model handle.
typedef struct DfrsField DfrsField;

// Noise model handle.
typedef struct DfrsNoise DfrsNoise;

// Cell partition handle.
typedef struct DfrsPartition DfrsPartition;

// Random threshold model handle.
typedef struct DfrsThreshold DfrsThreshold;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string; never freed by the
// caller.
const char *dfrs_version(void);

// Copy the calling thread's last error message into `buf` as a
// NUL-terminated string, truncating to `cap - 1` bytes. Returns the full
// message length in bytes (excluding the NUL), so calling with
// `(NULL, 0)` sizes a buffer. The message is replaced by each failing
// call on the same thread and survives intervening successes.
//
// # Safety
//
// `buf` must be null or valid for writing `cap` bytes.
size_t dfrs_last_error(char *buf, size_t cap);

// Create a spatially constant field: `values[t-1]` at snapshot `t`.
// `values_len` must equal `t_count` and every value must lie in
// `[-range, range]`.
//
// # Safety
//
// `values` must point to `values_len` readable doubles (or be null with
// `values_len == 0`); `out` must be valid for writing one pointer.
DfrsStatus dfrs_field_constant_new(size_t d,
                                   size_t t_count,
                                   double range,
                                   const double *values,
                                   size_t values_len,
                                   DfrsField **out);

// Create an affine field `slopes . x + offsets[t-1]`. `slopes_len` must
// equal `d` and `offsets_len` must equal `t_count`; the field must stay
// within `[-range, range]` over the unit cube.
//
// # Safety
//
// `slopes` and `offsets` must point to their stated number of readable
// doubles; `out` must be valid for writing one pointer.
DfrsStatus dfrs_field_linear_new(size_t d,
                                 size_t t_count,
                                 double range,
                                 const double *slopes,
                                 size_t slopes_len,
                                 const double *offsets,
                                 size_t offsets_len,
                                 DfrsField **out);

// Create the smooth field
// `amplitude * sin(2 pi frequencies . x + phases[t-1])`.
// `frequencies_len` must equal `d` and `phases_len` must equal `t_count`;
// `amplitude` must not exceed `range`.
//
// # Safety
//
// `frequencies` and `phases` must point to their stated number of
// readable doubles; `out` must be valid for writing one pointer.
DfrsStatus dfrs_field_sinusoidal_new(size_t d,
                                     size_t t_count,
                                     double range,
                                     double amplitude,
                                     const double *frequencies,
                                     size_t frequencies_len,
                                     const double *phases,
                                     size_t phases_len,
                                     DfrsField **out);

// Create the discontinuous benchmark field: two levels split by the
// hyperplane `normal . x = offset`, taking `level_high` where
// `normal . x >= offset`, constant over time. `normal_len` must equal
// `d`.
//
// # Safety
//
// `normal` must point to `normal_len` readable doubles; `out` must be
// valid for writing one pointer.
DfrsStatus dfrs_field_step_new(size_t d,
                               size_t t_count,
                               double range,
                               const double *normal,
                               size_t normal_len,
                               double offset,
                               double level_low,
                               double level_high,
                               DfrsField **out);

// Evaluate the true field at position `x` (inside the unit cube, length
// `x_len == d`) and 1-based snapshot `t`.
//
// # Safety
//
// `field` must be a live handle from a `dfrs_field_*_new` call; `x` must
// point to `x_len` readable doubles; `out_value` must be valid for
// writing one double.
DfrsStatus dfrs_field_eval(const DfrsField *field,
                           const double *x,
                           size_t x_len,
                           size_t t,
                           double *out_value);

// Release a field handle. Null is a no-op.
//
// # Safety
//
// `field` must be null or a handle not freed before; it must not be used
// afterwards.
void dfrs_field_free(DfrsField *field);

// Create the two-level partition of the `d`-dimensional unit cube:
// `l` supercells per axis, each split into `m` subcells per axis
// (`L = l^d` supercells, `M = m^d` subcells each).
//
// # Safety
//
// `out` must be valid for writing one pointer.
DfrsStatus dfrs_partition_new(size_t d, size_t l, size_t m, DfrsPartition **out);

// Release a partition handle. Null is a no-op.
//
// # Safety
//
// `partition` must be null or a handle not freed before; it must not be
// used afterwards.
void dfrs_partition_free(DfrsPartition *partition);

// Deploy exactly `per_subcell` sensors in every subcell, on a regular
// lattice within each.
//
// # Safety
//
// `partition` must be a live handle; `out` must be valid for writing one
// pointer.
DfrsStatus dfrs_deploy_grid(const DfrsPartition *partition,
                            size_t per_subcell,
                            DfrsDeployment **out);

// Deploy `n_total` sensors independently and uniformly in the unit cube,
// reproducibly from `seed`.
//
// # Safety
//
// `partition` must be a live handle; `out` must be valid for writing one
// pointer.
DfrsStatus dfrs_deploy_iid_uniform(const DfrsPartition *partition,
                                   size_t n_total,
                                   uint64_t seed,
                                   DfrsDeployment **out);

// Number of deployed sensors.
//
// # Safety
//
// `deployment` must be a live handle; `out_count` must be valid for
// writing one value.
DfrsStatus dfrs_deployment_sensor_count(const DfrsDeployment *deployment, size_t *out_count);

// Copy the position of 0-based sensor `i` into `buf`; `buf_len` must be
// at least the partition dimension `d`, and exactly `d` doubles are
// written.
//
// # Safety
//
// `deployment` must be a live handle; `buf` must be valid for writing
// `buf_len` doubles.
DfrsStatus dfrs_deployment_position(const DfrsDeployment *deployment,
                                    size_t i,
                                    double *buf,
                                    size_t buf_len);

// Release a deployment handle. Null is a no-op.
//
// # Safety
//
// `deployment` must be null or a handle not freed before; it must not be
// used afterwards.
void dfrs_deployment_free(DfrsDeployment *deployment);

// Create a zero-mean noise model bounded by `b`. `param1`/`param2` carry
// the family-specific parameters (see [`DfrsNoiseFamily`]); unused ones
// are ignored.
//
// # Safety
//
// `out` must be valid for writing one pointer.
DfrsStatus dfrs_noise_new(DfrsNoiseFamily family,
                          double param1,
                          double param2,
                          double b,
                          DfrsCorrelation correlation,
                          DfrsNoise **out);

// Release a noise handle. Null is a no-op.
//
// # Safety
//
// `noise` must be null or a handle not freed before; it must not be used
// afterwards.
void dfrs_noise_free(DfrsNoise *noise);

// Create the random-threshold model: thresholds drawn uniformly from
// `[-c, c]`. `c` must cover the signal-plus-noise range `a + b`.
//
// # Safety
//
// `out` must be valid for writing one pointer.
DfrsStatus dfrs_threshold_new(double c, DfrsCorrelation correlation, DfrsThreshold **out);

// Release a threshold handle. Null is a no-op.
//
// # Safety
//
// `threshold` must be null or a handle not freed before; it must not be
// used afterwards.
void dfrs_threshold_free(DfrsThreshold *threshold);

// Run one full simulation pass: every sensor observes, quantizes with
// its own reproducible randomness derived from `seed`, and the fusion
// rule produces the piecewise-constant reconstruction. The deployment
// must place the same count in every subcell.
//
// # Safety
//
// `field`, `deployment`, `noise`, and `threshold` must be live handles;
// `out` must be valid for writing one pointer.
DfrsStatus dfrs_estimate_direct(const DfrsField *field,
                                const DfrsDeployment *deployment,
                                const DfrsNoise *noise,
                                const DfrsThreshold *threshold,
                                uint64_t seed,
                                DfrsEstimate **out);

// Reconstructed value of 1-based supercell `j` at 1-based snapshot `t`.
//
// # Safety
//
// `estimate` must be a live handle; `out_value` must be valid for
// writing one double.
DfrsStatus dfrs_estimate_value(const DfrsEstimate *estimate, size_t t, size_t j, double *out_value);

// Evaluate the reconstruction at position `x` (length `x_len == d`) and
// 1-based snapshot `t`.
//
// # Safety
//
// `estimate` must be a live handle; `x` must point to `x_len` readable
// doubles; `out_value` must be valid for writing one double.
DfrsStatus dfrs_estimate_evaluate(const DfrsEstimate *estimate,
                                  const double *x,
                                  size_t x_len,
                                  size_t t,
                                  double *out_value);

// Release an estimate handle. Null is a no-op.
//
// # Safety
//
// `estimate` must be null or a handle not freed before; it must not be
// used afterwards.
void dfrs_estimate_free(DfrsEstimate *estimate);

// Pointwise mean-squared-error guarantee for a design with `l_count`
// supercells, `m_count` subcells each, `n_total` sensors, and threshold
// range `c`, evaluated at position `x` and snapshot `t`. Writes the
// local (smoothness at `x`) and global (worst-case smoothness) bounds.
//
// # Safety
//
// `field` must be a live handle; `x` must point to `x_len` readable
// doubles; `out_local` and `out_global` must each be valid for writing
// one double.
DfrsStatus dfrs_pointwise_mse_bound(const DfrsField *field,
                                    size_t l_count,
                                    size_t m_count,
                                    size_t n_total,
                                    double c,
                                    const double *x,
                                    size_t x_len,
                                    size_t t,
                                    double *out_local,
                                    double *out_global);

// Large-deviation upper bound on the probability that an iid-uniform
// deployment of `n_total` sensors leaves some subcell more than a factor
// `delta` away from its fair share. Writes the probability bound and the
// divergence exponent (bits).
//
// # Safety
//
// `out_probability` and `out_divergence` must each be valid for writing
// one double.
DfrsStatus dfrs_sanov_bound(size_t n_total,
                            size_t l_count,
                            size_t m_count,
                            double delta,
                            double *out_probability,
                            double *out_divergence);

// Supercell count `L` minimizing the worst-case error bound for `field`
// with `n_total` sensors, `m_count` subcells per supercell, and
// threshold range `c`.
//
// # Safety
//
// `field` must be a live handle; `out_l` must be valid for writing one
// value.
DfrsStatus dfrs_optimal_supercells(size_t n_total,
                                   const DfrsField *field,
                                   size_t m_count,
                                   double c,
                                   size_t *out_l);

// Monte Carlo check that the two one-bit quantizer implementations
// (threshold comparison and dither-sign expansion) draw from the same
// conditional law. Runs `trials` draws at each of `points` signal values
// spanning `[-c, c]` and writes the worst empirical deviation along with
// the acceptance tolerance `4 sqrt(0.25 / trials)`.
//
// # Safety
//
// `out_max_deviation` and `out_tolerance` must each be valid for writing
// one double.
DfrsStatus dfrs_equivalence_max_deviation(double c,
                                          size_t points,
                                          size_t trials,
                                          uint64_t seed,
                                          double *out_max_deviation,
                                          double *out_tolerance);

// Cramer-Rao lower bound on the variance of any unbiased location
// estimate from `n_obs` real-valued observations under `noise`. Fails
// with `DFRS_STATUS_NON_REGULAR_PDF` when the family has no density or
// its density is not regular enough for the bound (discrete, uniform,
// and edge-truncated families).
//
// # Safety
//
// `noise` must be a live handle; `out_bound` must be valid for writing
// one double.
DfrsStatus dfrs_cramer_rao_bound(const DfrsNoise *noise, size_t n_obs, double *out_bound);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DFRS_H */
