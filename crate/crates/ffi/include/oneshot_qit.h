#ifndef ONESHOT_QIT_H
#define ONESHOT_QIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define OSQIT_OK 0

#define OSQIT_ERR 1

#define OSQIT_PARSE 2

#define OSQIT_DOMAIN 3

/**
 * Opaque channel handle.
 */
typedef struct OsqitChannel OsqitChannel;

/**
 * Opaque Hermitian operator handle.
 */
typedef struct OsqitOperator OsqitOperator;

/**
 * Opaque density state handle.
 */
typedef struct OsqitState OsqitState;

/**
 * Copies the last error message on this thread into `buf` (truncated,
 * always NUL-terminated). Returns the full message length in bytes.
 */
uintptr_t osqit_last_error(char *buf, uintptr_t len);

/**
 * Parses a density state from matrix JSON. On success writes a handle
 * the caller must release with `osqit_state_free`.
 */
int32_t osqit_state_from_json(const char *json, struct OsqitState **out);

/**
 * Parses a Hermitian operator from matrix JSON. Release with
 * `osqit_operator_free`.
 */
int32_t osqit_operator_from_json(const char *json, struct OsqitOperator **out);

/**
 * Parses a channel from Kraus JSON. Release with `osqit_channel_free`.
 */
int32_t osqit_channel_from_json(const char *json, struct OsqitChannel **out);

void osqit_state_free(struct OsqitState *state);

void osqit_operator_free(struct OsqitOperator *op);

void osqit_channel_free(struct OsqitChannel *ch);

/**
 * Von Neumann entropy in bits.
 */
int32_t osqit_von_neumann(const struct OsqitState *state, double *out);

/**
 * Umegaki relative entropy D(rho || sigma) in bits; writes infinity on
 * support violation.
 */
int32_t osqit_relative_entropy(const struct OsqitState *state,
                               const struct OsqitOperator *sigma,
                               double *out);

/**
 * Max-relative entropy D_max in bits.
 */
int32_t osqit_dmax(const struct OsqitState *state, const struct OsqitOperator *sigma, double *out);

/**
 * Hypothesis-testing relative entropy D_h^eps in bits; `eps` is the
 * type-I error budget.
 */
int32_t osqit_dh(const struct OsqitState *state,
                 const struct OsqitOperator *sigma,
                 double eps,
                 double *out);

/**
 * Purified distance P(rho, sigma) between two states.
 */
int32_t osqit_purified_distance(const struct OsqitState *rho,
                                const struct OsqitState *sigma,
                                double *out);

/**
 * Root fidelity F(rho, sigma).
 */
int32_t osqit_fidelity(const struct OsqitState *rho, const struct OsqitState *sigma, double *out);

/**
 * Two-sided bounds on the smoothed max-relative entropy D_max^eps.
 */
int32_t osqit_dmax_smoothed_bounds(const struct OsqitState *state,
                                   const struct OsqitOperator *sigma,
                                   double eps,
                                   double *out_lower,
                                   double *out_upper);

/**
 * Channel functionals: certified lower bounds on the capacity-like
 * quantity and the variance maximum, from a seeded multi-start search.
 */
int32_t osqit_channel_functionals(const struct OsqitChannel *channel,
                                  uint64_t seed,
                                  double *out_capacity,
                                  double *out_vmax);

/**
 * Runs one named verification suite. Writes 1 into `out_pass` when the
 * suite's property held, 0 otherwise; the detail line lands in the
 * per-thread error slot either way.
 */
int32_t osqit_verify_suite(const char *name, uintptr_t trials, uint64_t seed, int32_t *out_pass);

#endif  /* ONESHOT_QIT_H */
