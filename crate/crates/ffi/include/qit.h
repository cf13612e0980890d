#ifndef QIT_H
#define QIT_H

/* Generated from the qit-ffi Rust source; regenerate with QIT_REGEN_HEADER=1 cargo test -p qit-ffi. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Engine selector values accepted by `qit_run_transfer`.
 */
typedef enum QitEngine {
  QIT_ENGINE_ANALYTIC = 0,
  QIT_ENGINE_EFFECTIVE = 1,
  QIT_ENGINE_FULL = 2,
} QitEngine;

/**
 * Call outcome; non-zero means the outputs were not written.
 */
typedef enum QitStatus {
  QIT_STATUS_OK = 0,
  QIT_STATUS_NULL_POINTER = 1,
  QIT_STATUS_INVALID_ARGUMENT = 2,
  QIT_STATUS_CONSTRAINT = 3,
  QIT_STATUS_INTEGRATION = 4,
  QIT_STATUS_INTERNAL = 5,
} QitStatus;

/**
 * Opaque protocol schedule plus its default integrator.
 */
typedef struct QitSchedule QitSchedule;

/**
 * Flat transfer outcome: final fidelity against the ideal target, photon
 * number left in the resonator, norm drift, and the per-step maxima of the
 * |2> population on each qubit (index 0 is step 1).
 */
typedef struct QitTransferOutcome {
  double fidelity;
  double residual_photon;
  double norm_drift;
  double leakage_a[4];
  double leakage_b[4];
} QitTransferOutcome;

/**
 * Builds the reference device at detuning ratio `ratio` (Delta = ratio * g
 * with g = 3.0e9 rad/s) and returns an owned handle in `*out`.
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum QitStatus qit_schedule_default(double ratio, struct QitSchedule **out);

/**
 * Builds a schedule from explicit device parameters, all in rad/s, and
 * returns an owned handle in `*out`.
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum QitStatus qit_schedule_new(double omega02_a,
                                double omega12_a,
                                double g_a,
                                double omega02_b,
                                double omega12_b,
                                double g_b,
                                double omega_c,
                                double rabi_tilde,
                                struct QitSchedule **out);

/**
 * Releases a handle returned by a `qit_schedule_*` constructor. A null
 * pointer is ignored.
 * # Safety
 * `schedule` must be null or a handle from a `qit_schedule_*`
 * constructor not yet freed; the handle is invalid afterwards.
 */
void qit_schedule_free(struct QitSchedule *schedule);

/**
 * Writes the total protocol duration in seconds to `*out`.
 * # Safety
 * `schedule` must be a live handle and `out` valid for writing one double.
 */
enum QitStatus qit_schedule_total_time(const struct QitSchedule *schedule, double *out);

/**
 * Runs one transfer of alpha|0> + beta|1> under the selected engine
 * (a `QitEngine` value) and fills `*out`.
 * # Safety
 * `schedule` must be a live handle and `out` valid for writing one
 * `QitTransferOutcome`.
 */
enum QitStatus qit_run_transfer(const struct QitSchedule *schedule,
                                int32_t engine,
                                double alpha_re,
                                double alpha_im,
                                double beta_re,
                                double beta_im,
                                struct QitTransferOutcome *out);

/**
 * Writes the driven |2> occupation of qubit 0 (a) or 1 (b) under its own
 * Raman pulse to `*out`.
 * # Safety
 * `schedule` must be a live handle and `out` valid for writing one double.
 */
enum QitStatus qit_occupation_p2(const struct QitSchedule *schedule, int32_t qubit, double *out);

/**
 * Writes the closed-form uniform-average transfer fidelity for Stark
 * scales (s_a, s_b) and pulse Rabi frequency rabi_tilde to `*out`.
 * # Safety
 * `out` must be valid for writing one double.
 */
enum QitStatus qit_average_fidelity(double s_a, double s_b, double rabi_tilde, double *out);

/**
 * Seeded Monte-Carlo average transfer fidelity with the photon-branch
 * phase shifts composed in; writes the mean and its standard error.
 * # Safety
 * `mean_out` and `std_error_out` must each be valid for writing one double.
 */
enum QitStatus qit_average_fidelity_mc(double s_a,
                                       double s_b,
                                       double rabi_tilde,
                                       size_t n_samples,
                                       uint64_t seed,
                                       double *mean_out,
                                       double *std_error_out);

/**
 * Static description of a status code; never null, never to be freed.
 */
const char *qit_status_message(int32_t status);

#endif  /* QIT_H */
