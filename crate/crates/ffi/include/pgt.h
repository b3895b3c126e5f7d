#ifndef PGT_H
#define PGT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PgtBound {
  PGT_BOUND_UPPER_FEASIBILITY = 0,
  PGT_BOUND_UPPER_FEASIBILITY_IMPROVED = 1,
  PGT_BOUND_UPPER_MEASURE_ONCE = 2,
  PGT_BOUND_UPPER_PREDICTION = 3,
  PGT_BOUND_LOWER_PROBABILITY_LABELS = 4,
  PGT_BOUND_LOWER_MEASURE_ONCE = 5,
} PgtBound;

typedef enum PgtLearner {
  PGT_LEARNER_FEASIBLE = 0,
  PGT_LEARNER_QUADRATIC = 1,
  PGT_LEARNER_ABSOLUTE = 2,
} PgtLearner;

typedef enum PgtStatus {
  PGT_STATUS_OK = 0,
  PGT_STATUS_NULL_POINTER = 1,
  PGT_STATUS_VALIDATION = 2,
  PGT_STATUS_NUMERICAL = 3,
  PGT_STATUS_CONSTRAINT = 4,
  PGT_STATUS_DIMENSION_MISMATCH = 5,
  PGT_STATUS_DEGENERATE_BRANCH = 6,
  PGT_STATUS_CONSTRUCTION = 7,
  PGT_STATUS_PANIC = 8,
} PgtStatus;

typedef struct PgtDensity PgtDensity;

typedef struct PgtEffect PgtEffect;

typedef struct PgtHypothesis PgtHypothesis;

typedef struct PgtLearnerConfig {
  double eta;
  size_t max_iters;
  double step_init;
  double tol;
} PgtLearnerConfig;

typedef struct PgtHypothesisSummary {
  double final_loss;
  size_t iterations;
  bool converged;
  double max_residual;
  bool vacuous;
} PgtHypothesisSummary;

/**
 * `alpha` is read only by the prediction bound; `k` is the constant factor.
 */
typedef struct PgtBoundQuery {
  uint32_t n_qubits;
  double gamma;
  double epsilon;
  double eta;
  double delta;
  double k;
  double alpha;
} PgtBoundQuery;

typedef struct PgtBoundResult {
  uint64_t m;
  double value;
} PgtBoundResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next `pgt_*` call on the same thread.
 */
const char *pgt_last_error_message(void);

const char *pgt_version(void);

/**
 * # Safety
 * `entries` holds `2 * dim * dim` doubles; `out` is writable.
 */
enum PgtStatus pgt_density_new(size_t dim, const double *entries, struct PgtDensity **out);

/**
 * Closest density matrix to the Hermitian matrix `entries` in Frobenius norm.
 *
 * # Safety
 * As for [`pgt_density_new`].
 */
enum PgtStatus pgt_project_to_density(size_t dim, const double *entries, struct PgtDensity **out);

/**
 * # Safety
 * `state` is null or a live handle.
 */
size_t pgt_density_dim(const struct PgtDensity *state);

/**
 * Copies the `2 * dim * dim` entries into `out`, which holds `len` doubles.
 *
 * # Safety
 * `state` is a live handle; `out` holds `len` doubles.
 */
enum PgtStatus pgt_density_entries(const struct PgtDensity *state, double *out, size_t len);

/**
 * # Safety
 * `state` is null or a handle not yet freed.
 */
void pgt_density_free(struct PgtDensity *state);

/**
 * # Safety
 * As for [`pgt_density_new`].
 */
enum PgtStatus pgt_effect_new(size_t dim, const double *entries, struct PgtEffect **out);

/**
 * # Safety
 * `effect` is null or a handle not yet freed.
 */
void pgt_effect_free(struct PgtEffect *effect);

/**
 * `Tr(E ρ)`.
 *
 * # Safety
 * Handles are live; `out` is writable.
 */
enum PgtStatus pgt_expectation(const struct PgtEffect *effect,
                               const struct PgtDensity *state,
                               double *out);

/**
 * Euclidean projection of `v` onto the probability simplex.
 *
 * # Safety
 * `v` and `out` each hold `n` doubles.
 */
enum PgtStatus pgt_simplex_project(const double *v, size_t n, double *out);

struct PgtLearnerConfig pgt_learner_config_default(void);

/**
 * Fits a hypothesis to `m` effects. The feasible learner reads `labels`
 * as probabilities; the others read them as bits (nonzero is 1).
 *
 * # Safety
 * `effects` and `labels` hold `m` entries; `config` is null (defaults) or
 * readable; `out` is writable.
 */
enum PgtStatus pgt_learn(enum PgtLearner rule,
                         size_t dim,
                         const struct PgtEffect *const *effects,
                         const double *labels,
                         size_t m,
                         const struct PgtLearnerConfig *config,
                         struct PgtHypothesis **out);

/**
 * # Safety
 * `h` is a live handle; `out` is writable.
 */
enum PgtStatus pgt_hypothesis_summary(const struct PgtHypothesis *h,
                                      struct PgtHypothesisSummary *out);

/**
 * A new density handle holding a copy of the hypothesis state.
 *
 * # Safety
 * `h` is a live handle; `out` is writable.
 */
enum PgtStatus pgt_hypothesis_state(const struct PgtHypothesis *h, struct PgtDensity **out);

/**
 * # Safety
 * `h` is null or a handle not yet freed.
 */
void pgt_hypothesis_free(struct PgtHypothesis *h);

/**
 * Probability that measuring `effects` in order on `state` rejects at
 * least once, accepting through `√E`.
 *
 * # Safety
 * `state` is live; `effects` holds `m` live handles; `out` is writable.
 */
enum PgtStatus pgt_sequential_survival(const struct PgtDensity *state,
                                       const struct PgtEffect *const *effects,
                                       size_t m,
                                       double *out);

/**
 * # Safety
 * `query` is readable; `out` is writable.
 */
enum PgtStatus pgt_bound(enum PgtBound which,
                         const struct PgtBoundQuery *query,
                         struct PgtBoundResult *out);

/**
 * # Safety
 * `out` is writable.
 */
enum PgtStatus pgt_fat_dim_upper(uint32_t n_qubits, double gamma, uint64_t *out);

/**
 * # Safety
 * `out` is writable.
 */
enum PgtStatus pgt_binary_entropy(double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PGT_H */
