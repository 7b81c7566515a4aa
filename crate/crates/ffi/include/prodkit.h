#ifndef PRODKIT_H
#define PRODKIT_H

/* Generated by cbindgen from prodkit-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// ABI revision; bump on any breaking change to this header.
#define PRODKIT_ABI_VERSION 1

// Status codes returned by every entry point.
typedef enum ProdkitStatus {
  PRODKIT_STATUS_OK = 0,
  PRODKIT_STATUS_NULL_ARGUMENT = 1,
  PRODKIT_STATUS_INVALID_UTF8 = 2,
  PRODKIT_STATUS_PARSE_ERROR = 3,
  PRODKIT_STATUS_EVAL_ERROR = 4,
  PRODKIT_STATUS_DOMAIN_ERROR = 5,
  PRODKIT_STATUS_PRECONDITION_ERROR = 6,
  PRODKIT_STATUS_INVALID_INPUT = 7,
  PRODKIT_STATUS_INTERNAL_ERROR = 8,
} ProdkitStatus;

// An opaque positive sequence.
typedef struct ProdkitSeq ProdkitSeq;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// ABI revision of this library.
uint32_t prodkit_abi_version(void);

// Static name of a status code.
const char *prodkit_status_name(enum ProdkitStatus status);

// Detail message for the most recent failure on this thread, as a new
// string owned by the caller (free with `prodkit_string_free`). Returns
// NULL when no failure has been recorded.
char *prodkit_last_error_message(void);

// Free a string allocated by this library. NULL is a no-op.
//
// # Safety
// `s` must have been returned by a prodkit function and not freed before.
void prodkit_string_free(char *s);

// Parse a sequence expression in the variable `n`. `origin` is the index
// of the first term (0 or 1). On success writes a new handle to `out`.
//
// # Safety
// `text` must point to a NUL-terminated string and `out` to writable
// storage for one pointer.
enum ProdkitStatus prodkit_seq_parse(const char *text, uint64_t origin, struct ProdkitSeq **out);

// Build a sequence from an explicit array of positive values (origin 1).
//
// # Safety
// `values` must point to `len` readable doubles and `out` to writable
// storage for one pointer.
enum ProdkitStatus prodkit_seq_from_values(const double *values,
                                           size_t len,
                                           struct ProdkitSeq **out);

// Free a sequence handle. NULL is a no-op.
//
// # Safety
// `seq` must have been returned by a prodkit constructor and not freed
// before.
void prodkit_seq_free(struct ProdkitSeq *seq);

// Evaluate the `n`-th factor.
//
// # Safety
// `seq` must be a live handle and `value` writable.
enum ProdkitStatus prodkit_seq_term(const struct ProdkitSeq *seq, uint64_t n, double *value);

// Evaluate `log a_n`.
//
// # Safety
// `seq` must be a live handle and `value` writable.
enum ProdkitStatus prodkit_seq_log_term(const struct ProdkitSeq *seq, uint64_t n, double *value);

// Multiplicative absolute value `max(x, 1/x)` of a positive real.
//
// # Safety
// `value` must be writable.
enum ProdkitStatus prodkit_mmod(double x, double *value);

// Multiplicative positive/negative parts of a positive real:
// `p/q = x` and `p*q = mmod(x)`.
//
// # Safety
// `p` and `q` must be writable.
enum ProdkitStatus prodkit_mparts(double x, double *p, double *q);

// Convergence verdict for `prod a_n` as a JSON document
// `{"kind","limit_estimate","liminf","limsup","n_used","eps","evidence"}`.
// `window = 0` selects the default trailing window of `n_max / 2`.
//
// # Safety
// `seq` must be a live handle and `out_json` writable; free the result
// with `prodkit_string_free`.
enum ProdkitStatus prodkit_analyze_json(const struct ProdkitSeq *seq,
                                        double eps,
                                        uint64_t n_max,
                                        uint64_t window,
                                        char **out_json);

// Verdict and sandwich report for `prod mmod(a_n)`, as JSON.
//
// # Safety
// As for `prodkit_analyze_json`.
enum ProdkitStatus prodkit_m_absolute_json(const struct ProdkitSeq *seq,
                                           double eps,
                                           uint64_t n_max,
                                           uint64_t window,
                                           char **out_json);

// Double-double oracle comparison report, as JSON.
//
// # Safety
// As for `prodkit_analyze_json`.
enum ProdkitStatus prodkit_oracle_compare_json(const struct ProdkitSeq *seq,
                                               double eps,
                                               uint64_t n_max,
                                               uint64_t window,
                                               char **out_json);

// Least index `n0` past which every tail product of mmod factors stays
// within `eps` of 1 (the uniform bound for exponent families and
// subproducts). Fails with a precondition status when the horizon is
// exhausted first.
//
// # Safety
// `seq` must be a live handle and `out_n0` writable.
enum ProdkitStatus prodkit_uniform_tail_n0(const struct ProdkitSeq *seq,
                                           double eps,
                                           uint64_t horizon,
                                           uint64_t *out_n0);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRODKIT_H */
