#ifndef ZEROSUM_STOP_H
#define ZEROSUM_STOP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ZsStatus {
  ZS_STATUS_OK = 0,
  ZS_STATUS_NULL_POINTER = 1,
  ZS_STATUS_INVALID_ARGUMENT = 2,
  ZS_STATUS_PARSE = 3,
  ZS_STATUS_DOMAIN = 4,
  ZS_STATUS_TOO_LARGE = 5,
  ZS_STATUS_BUFFER_TOO_SMALL = 6,
  ZS_STATUS_IO = 7,
  ZS_STATUS_PANIC = 8,
} ZsStatus;

typedef enum ZsTie {
  ZS_TIE_STOP = 0,
  ZS_TIE_CONTINUE = 1,
} ZsTie;

typedef enum ZsMode {
  ZS_MODE_SUFFIX = 0,
  ZS_MODE_PREFIX = 1,
} ZsMode;

typedef enum ZsStrategy {
  ZS_STRATEGY_THRESHOLD = 0,
  ZS_STRATEGY_OPTIMAL = 1,
  ZS_STRATEGY_MIDDLE = 2,
} ZsStrategy;

/**
 * Opaque zero-sum multiset.
 */
typedef struct ZsMultiset ZsMultiset;

/**
 * Opaque backward-induction tables for the balanced ±1 deck.
 */
typedef struct ZsTables ZsTables;

/**
 * Monte Carlo summary; mirrors the JSON report minus the strings.
 */
typedef struct ZsSimReport {
  size_t n;
  uint64_t reps;
  uint64_t seed;
  double mean;
  double stderr;
} ZsSimReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to fit) and returns the full message length. Returns 0 when the
 * last call succeeded.
 */
size_t zs_last_error_message(char *buf, size_t cap);

/**
 * Builds the tables for the deck of `m` minus ones and `m` plus ones.
 */
enum ZsStatus zs_tables_build(size_t m, enum ZsTie tie, struct ZsTables **out);

void zs_tables_free(struct ZsTables *tables);

/**
 * Half-length `m` of the tables, or 0 for a null handle.
 */
size_t zs_tables_m(const struct ZsTables *tables);

/**
 * Writes `T[i,j]` as `"p/q"`.
 */
enum ZsStatus zs_tables_value(const struct ZsTables *tables,
                              size_t i,
                              size_t j,
                              char *buf,
                              size_t cap,
                              size_t *out_len);

/**
 * `T[i,j]` rounded to the nearest double.
 */
enum ZsStatus zs_tables_value_f64(const struct ZsTables *tables, size_t i, size_t j, double *out);

/**
 * `S[i,j]`: whether the optimal player stops at state `(i,j)`.
 */
enum ZsStatus zs_tables_stops(const struct ZsTables *tables, size_t i, size_t j, bool *out);

/**
 * Parses a multiset from text (whitespace or comma separated values such as
 * `-5 1/2 0.25`, `#` comments, or a JSON array).
 */
enum ZsStatus zs_multiset_parse(const char *text, struct ZsMultiset **out);

/**
 * The balanced deck of `m` minus ones and `m` plus ones.
 */
enum ZsStatus zs_multiset_binary(size_t m, struct ZsMultiset **out);

size_t zs_multiset_len(const struct ZsMultiset *multiset);

void zs_multiset_free(struct ZsMultiset *multiset);

/**
 * Exact optimal expected payoff of an arbitrary small multiset.
 */
enum ZsStatus zs_general_optimal_value(const struct ZsMultiset *multiset,
                                       enum ZsMode payoff,
                                       char *buf,
                                       size_t cap,
                                       size_t *out_len);

/**
 * Exact expectation of the positive part of the sum of a random half.
 */
enum ZsStatus zs_f_value(const struct ZsMultiset *multiset, char *buf, size_t cap, size_t *out_len);

/**
 * Exact stop-in-the-middle expectation for the balanced deck of even size `n`.
 */
enum ZsStatus zs_w3_exact(uint64_t n, char *buf, size_t cap, size_t *out_len);

/**
 * Exact expected payoff of a strategy by enumerating every ordering.
 */
enum ZsStatus zs_exact_expected(enum ZsStrategy kind,
                                const struct ZsMultiset *multiset,
                                enum ZsMode payoff,
                                char *buf,
                                size_t cap,
                                size_t *out_len);

/**
 * Seeded Monte Carlo run; bit-identical to the CLI `simulate` verb.
 */
enum ZsStatus zs_simulate(enum ZsStrategy kind,
                          const struct ZsMultiset *multiset,
                          enum ZsMode payoff,
                          uint64_t reps,
                          uint64_t seed,
                          struct ZsSimReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZEROSUM_STOP_H */
