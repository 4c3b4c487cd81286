#ifndef RMT_LAB_H
#define RMT_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum RmtStatus {
  RMT_STATUS_OK = 0,
  RMT_STATUS_INVALID_ARGUMENT = 1,
  RMT_STATUS_NULL_POINTER = 2,
  RMT_STATUS_BUFFER_TOO_SMALL = 3,
  /**
   * Input outside the domain where the quantity is defined or supported.
   */
  RMT_STATUS_DOMAIN = 4,
  RMT_STATUS_NUMERICAL = 5,
  RMT_STATUS_PANIC = 6,
} RmtStatus;

typedef enum RmtEnsemble {
  RMT_ENSEMBLE_GUE = 0,
  RMT_ENSEMBLE_GOE = 1,
  RMT_ENSEMBLE_GINIBRE = 2,
  RMT_ENSEMBLE_WISHART = 3,
} RmtEnsemble;

typedef enum RmtLaw {
  /**
   * Semicircle on [−2, 2].
   */
  RMT_LAW_SEMICIRCLE = 0,
  /**
   * Marchenko–Pastur; `param` is the ratio c.
   */
  RMT_LAW_MARCHENKO_PASTUR = 1,
  /**
   * Stationary OU law; `param` is θ.
   */
  RMT_LAW_OU_LIMIT = 2,
} RmtLaw;

/**
 * Opaque eigenvalue sample.
 */
typedef struct RmtSpectrum RmtSpectrum;

/**
 * Opaque particle trajectory.
 */
typedef struct RmtTrajectory RmtTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *rmt_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rmt_version(void);

/**
 * Draw one matrix from `ensemble` with stream (seed, stream_id) and store its spectrum.
 * `m` is read only for Wishart. With `normalize` set, eigenvalues are divided by √n
 * (Wishart is already normalized).
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum RmtStatus rmt_spectrum_sample(enum RmtEnsemble ensemble,
                                   size_t n,
                                   size_t m,
                                   uint64_t seed,
                                   uint64_t stream_id,
                                   bool normalize,
                                   struct RmtSpectrum **out);

/**
 * Number of eigenvalues, or 0 for a null handle.
 *
 * # Safety
 * `spectrum` is null or a live handle.
 */
size_t rmt_spectrum_len(const struct RmtSpectrum *spectrum);

/**
 * True when the spectrum is complex (Ginibre).
 *
 * # Safety
 * `spectrum` is null or a live handle.
 */
bool rmt_spectrum_is_complex(const struct RmtSpectrum *spectrum);

/**
 * Copy eigenvalues into `re` (and `im`, which may be null for real spectra);
 * both buffers hold `capacity` doubles. Real spectra write zeros to `im`.
 *
 * # Safety
 * `spectrum` is a live handle; `re` (and non-null `im`) are valid for `capacity` writes.
 */
enum RmtStatus rmt_spectrum_copy(const struct RmtSpectrum *spectrum,
                                 double *re,
                                 double *im,
                                 size_t capacity);

/**
 * Bounded-Lipschitz distance between a real spectrum's ESD and a reference law.
 *
 * # Safety
 * `spectrum` is a live handle; `out` is valid for a write.
 */
enum RmtStatus rmt_spectrum_bl_distance(const struct RmtSpectrum *spectrum,
                                        enum RmtLaw law,
                                        double param,
                                        double *out);

/**
 * Release a spectrum handle; null is ignored.
 *
 * # Safety
 * `spectrum` is null or a handle not yet freed.
 */
void rmt_spectrum_free(struct RmtSpectrum *spectrum);

/**
 * Zero-start Dyson motion with `beta` ∈ {1, 2}, recording `records` evenly spaced
 * states up to `t_end`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum RmtStatus rmt_dyson_simulate(uint8_t beta,
                                  size_t n,
                                  double t_end,
                                  double dt_max,
                                  size_t records,
                                  uint64_t seed,
                                  struct RmtTrajectory **out);

/**
 * Number of recorded states, or 0 for a null handle.
 *
 * # Safety
 * `trajectory` is null or a live handle.
 */
size_t rmt_trajectory_len(const struct RmtTrajectory *trajectory);

/**
 * Particle count, or 0 for a null handle.
 *
 * # Safety
 * `trajectory` is null or a live handle.
 */
size_t rmt_trajectory_particles(const struct RmtTrajectory *trajectory);

/**
 * Copy recorded state `index` (time and ordered positions).
 *
 * # Safety
 * `trajectory` is a live handle; `time` is valid for a write; `positions` for `capacity` writes.
 */
enum RmtStatus rmt_trajectory_state(const struct RmtTrajectory *trajectory,
                                    size_t index,
                                    double *time,
                                    double *positions,
                                    size_t capacity);

/**
 * Release a trajectory handle; null is ignored.
 *
 * # Safety
 * `trajectory` is null or a handle not yet freed.
 */
void rmt_trajectory_free(struct RmtTrajectory *trajectory);

/**
 * GUE kernel K_N(x, y) with Hermite-function normalization.
 *
 * # Safety
 * `out` is valid for a write.
 */
enum RmtStatus rmt_gue_kernel(size_t n, double x, double y, double *out);

/**
 * S(z) = ∫ dσ(x)/(z − x) for the semicircle on [−2, 2], z off the real axis.
 *
 * # Safety
 * `out_re` and `out_im` are valid for writes.
 */
enum RmtStatus rmt_semicircle_stieltjes(double re, double im, double *out_re, double *out_im);

/**
 * log of the probability that the infinite Ginibre process has no point in |z| < r;
 * `truncation` 0 selects the default product length.
 *
 * # Safety
 * `out_log_prob` is valid for a write; `out_tail_bound` is null or valid for a write.
 */
enum RmtStatus rmt_hole_probability(double r,
                                    size_t truncation,
                                    double *out_log_prob,
                                    double *out_tail_bound);

/**
 * log Z for Z = ∫ |Δ(λ)|^β exp(−(N/2)|λ|²) dλ over ℝ^N.
 *
 * # Safety
 * `out` is valid for a write.
 */
enum RmtStatus rmt_selberg_log_z(size_t n, double beta, double *out);

/**
 * Large-N limit of (1/N²) log Z.
 *
 * # Safety
 * `out` is valid for a write.
 */
enum RmtStatus rmt_free_energy_limit(double beta, double *out);

/**
 * Affine Gumbel rescaling of a Ginibre spectral radius ρ (divided by √N) at size N.
 *
 * # Safety
 * `out` is valid for a write.
 */
enum RmtStatus rmt_gumbel_rescale(double rho, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RMT_LAB_H */
