#ifndef COUPLE_DYNAMICS_H
#define COUPLE_DYNAMICS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define CD_STATES 16

#define CD_SCENARIO_MODEL1_PLAIN 0

#define CD_SCENARIO_MODEL1_SC_BLIND 1

#define CD_SCENARIO_MODEL1_SC_GENDER 2

#define CD_SCENARIO_MODEL2_PLAIN 3

#define CD_SCENARIO_MODEL2_SC_BLIND 4

#define CD_SCENARIO_MODEL2_SC_GENDER 5

typedef enum CdStatus {
  CD_STATUS_OK = 0,
  CD_STATUS_NULL_POINTER = 1,
  CD_STATUS_INVALID_ARGUMENT = 2,
  CD_STATUS_OUT_OF_RANGE = 3,
  CD_STATUS_BUFFER_TOO_SMALL = 4,
  CD_STATUS_RUNTIME = 5,
  CD_STATUS_PANIC = 6,
} CdStatus;

/**
 * Opaque couple kernel.
 */
typedef struct CdKernel CdKernel;

/**
 * Opaque sweep result.
 */
typedef struct CdSweepGrid CdSweepGrid;

typedef struct CdModel1Basins {
  double normal;
  double separation;
  double male_violence;
  double female_violence;
} CdModel1Basins;

typedef struct CdModel2Observables {
  double normal;
  double threshold;
  double recovering;
  double violence_cycle;
  double mutual_violence;
  double separation;
} CdModel2Observables;

typedef struct CdGenderViolence {
  double v1;
  double v2;
} CdGenderViolence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cd_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into the library from the same thread.
 */
const char *cd_last_error(void);

/**
 * # Safety
 * `out` must be null or point to writable storage for one `uint8_t`.
 */
enum CdStatus cd_state_encode(int8_t s1, int8_t s2, uint8_t *out);

/**
 * # Safety
 * `s1` and `s2` must be null or point to writable `int8_t`s.
 */
enum CdStatus cd_state_decode(uint8_t index, int8_t *s1, int8_t *s2);

/**
 * Individual table entry `tau(next | me, partner; param)` for model 1 or 2.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum CdStatus cd_tau(uint8_t model,
                     int8_t next,
                     int8_t me,
                     int8_t partner,
                     double param,
                     double *out);

/**
 * # Safety
 * `out` must be null or point to writable storage for one pointer. The
 * handle written there must be released with [`cd_kernel_free`].
 */
enum CdStatus cd_kernel_new(uint8_t model, double p1, double p2, struct CdKernel **out);

/**
 * # Safety
 * `kernel` must be null or a handle from [`cd_kernel_new`] not yet freed.
 */
void cd_kernel_free(struct CdKernel *kernel);

/**
 * # Safety
 * `kernel` must be a live handle; `out` a writable `double`.
 */
enum CdStatus cd_kernel_prob(const struct CdKernel *kernel, uint8_t from, uint8_t to, double *out);

/**
 * Copies the row-major 16x16 matrix into `out` (256 doubles).
 *
 * # Safety
 * `kernel` must be a live handle; `out` must hold 256 doubles.
 */
enum CdStatus cd_kernel_matrix(const struct CdKernel *kernel, double *out);

/**
 * Bit `i` set when state `i` is absorbing.
 *
 * # Safety
 * `kernel` must be a live handle; `out` a writable `uint16_t`.
 */
enum CdStatus cd_kernel_absorbing_mask(const struct CdKernel *kernel, uint16_t *out);

/**
 * Bit `i` set when state `i` has no predecessor other than itself.
 *
 * # Safety
 * `kernel` must be a live handle; `out` a writable `uint16_t`.
 */
enum CdStatus cd_kernel_garden_of_eden_mask(const struct CdKernel *kernel,
                                            bool exclude_self_loops,
                                            uint16_t *out);

/**
 * Exact evolution of a normalized distribution by `steps` steps.
 *
 * # Safety
 * `probs_in` and `probs_out` must each hold 16 doubles; they may alias.
 */
enum CdStatus cd_evolve(const struct CdKernel *kernel,
                        const double *probs_in,
                        size_t steps,
                        double *probs_out);

/**
 * Empirical final-state distribution of `ensemble` trajectories.
 *
 * # Safety
 * `kernel` must be a live handle; `probs_out` must hold 16 doubles.
 */
enum CdStatus cd_estimate_distribution(const struct CdKernel *kernel,
                                       uint8_t start,
                                       size_t steps,
                                       size_t ensemble,
                                       uint64_t seed,
                                       double *probs_out);

/**
 * Writes `steps + 1` state indices into `out_states`.
 *
 * # Safety
 * `out_states` must hold `out_len` bytes.
 */
enum CdStatus cd_sample_trajectory(const struct CdKernel *kernel,
                                   uint8_t start,
                                   size_t steps,
                                   uint64_t seed,
                                   uint8_t *out_states,
                                   size_t out_len);

/**
 * # Safety
 * `probs` must hold 16 doubles; `out` must be writable.
 */
enum CdStatus cd_model1_basins(const double *probs, struct CdModel1Basins *out);

/**
 * # Safety
 * `probs` must hold 16 doubles; `out` must be writable.
 */
enum CdStatus cd_model2_observables(const double *probs,
                                    double support1,
                                    double support2,
                                    struct CdModel2Observables *out);

/**
 * The violence measure that drives each model's feedback.
 *
 * # Safety
 * `probs` must hold 16 doubles; `out` must be writable.
 */
enum CdStatus cd_perceived_violence(uint8_t model,
                                    const double *probs,
                                    struct CdGenderViolence *out);

double cd_f_update(double a, double v, double vc);

double cd_g_update(double s, double v, double vc);

/**
 * Runs a sweep with default settings except the given ones.
 * `ensemble = 0` selects the exact engine; `runs_per_cell = 0` keeps the
 * scenario default.
 *
 * # Safety
 * `out` must be writable; release the grid with [`cd_sweep_free`].
 */
enum CdStatus cd_sweep_run(uint32_t scenario,
                           size_t resolution,
                           size_t ensemble,
                           size_t runs_per_cell,
                           uint64_t seed,
                           struct CdSweepGrid **out);

/**
 * # Safety
 * `grid` must be null or a handle from [`cd_sweep_run`] not yet freed.
 */
void cd_sweep_free(struct CdSweepGrid *grid);

/**
 * Points per axis; 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t cd_sweep_resolution(const struct CdSweepGrid *grid);

/**
 * Number of recorded fields per cell; 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t cd_sweep_field_count(const struct CdSweepGrid *grid);

/**
 * Static name of field `k`, or null when out of range.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
const char *cd_sweep_field_name(const struct CdSweepGrid *grid, size_t k);

/**
 * Value of field `k` at cell `(i, j)`, i.e. `p1 = i / (n - 1)`,
 * `p2 = j / (n - 1)`.
 *
 * # Safety
 * `grid` must be a live handle; `out` a writable `double`.
 */
enum CdStatus cd_sweep_value(const struct CdSweepGrid *grid,
                             size_t k,
                             size_t i,
                             size_t j,
                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COUPLE_DYNAMICS_H */
