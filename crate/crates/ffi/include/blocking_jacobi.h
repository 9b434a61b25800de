#ifndef BLOCKING_JACOBI_H
#define BLOCKING_JACOBI_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Status codes returned by every fallible call.
 */
typedef enum BjStatus {
  BJ_STATUS_OK = 0,
  BJ_STATUS_NULL_POINTER = 1,
  BJ_STATUS_INVALID_UTF8 = 2,
  BJ_STATUS_PARSE = 3,
  BJ_STATUS_PARAMETER = 4,
  BJ_STATUS_INVALID_STATE = 5,
  BJ_STATUS_INVALID_GFP = 6,
  BJ_STATUS_INVALID_RATES = 7,
  BJ_STATUS_SERIES = 8,
  BJ_STATUS_NON_CONVERGENCE = 9,
  BJ_STATUS_OUT_OF_RANGE = 10,
  BJ_STATUS_OVERFLOW = 11,
  BJ_STATUS_PANIC = 12,
} BjStatus;

/*
 Product sides available to `bj_series_product`.
 */
typedef enum BjProduct {
  BJ_PRODUCT_K2_PLUS = 0,
  BJ_PRODUCT_K2_MINUS = 1,
  BJ_PRODUCT_K_EXCLUSION = 2,
  BJ_PRODUCT_JACOBI_SHIFTED = 3,
  BJ_PRODUCT_JACOBI_CLASSICAL = 4,
} BjProduct;

/*
 A generalized Frobenius partition.
 */
typedef struct BjGfp BjGfp;

/*
 A stood-up state (omega_{-1}, omega_{-2}, ...) in class m.
 */
typedef struct BjOmega BjOmega;

/*
 Result of an identity check.
 */
typedef struct BjReport BjReport;

/*
 A truncated series in q~, t and z with integer coefficients.
 */
typedef struct BjSeries BjSeries;

/*
 Message for the last failed call on this thread; empty after success.
 The pointer stays valid until the next call on this thread.
 */
const char *bj_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *bj_version(void);

/*
 Frees a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void bj_string_free(char *s);

/*
 S_even to q~-order `order`.

 # Safety
 `out` must be a valid pointer.
 */
enum BjStatus bj_series_s_even(uint32_t order, struct BjSeries **out);

/*
 S_odd to q~-order `order`.

 # Safety
 `out` must be a valid pointer.
 */
enum BjStatus bj_series_s_odd(uint32_t order, struct BjSeries **out);

/*
 k-exclusion normalizer of class m to q-order `order`.

 # Safety
 `out` must be a valid pointer.
 */
enum BjStatus bj_series_s_k(uint32_t k, uint32_t m, uint32_t order, struct BjSeries **out);

/*
 Expansion of a product side; `k` is used only by `KExclusion`.

 # Safety
 `out` must be a valid pointer.
 */
enum BjStatus bj_series_product(enum BjProduct product,
                                uint32_t k,
                                uint32_t order,
                                struct BjSeries **out);

/*
 Number of nonzero terms.

 # Safety
 `s` must be a live handle or null (returns 0).
 */
size_t bj_series_len(const struct BjSeries *s);

/*
 Truncation order in q~.

 # Safety
 `s` must be a live handle or null (returns 0).
 */
uint32_t bj_series_order(const struct BjSeries *s);

/*
 The `index`-th term in canonical order. The coefficient is written to
 `coeff` when it fits in 64 bits; otherwise `Overflow` is returned and
 `bj_series_coeff_string` gives the exact value.

 # Safety
 `s` must be a live handle; out-pointers must be valid.
 */
enum BjStatus bj_series_term(const struct BjSeries *s,
                             size_t index,
                             uint32_t *dq,
                             uint32_t *dt,
                             int32_t *dz,
                             int64_t *coeff);

/*
 Exact decimal coefficient of the `index`-th term; free with `bj_string_free`.

 # Safety
 `s` must be a live handle; `out` must be valid.
 */
enum BjStatus bj_series_coeff_string(const struct BjSeries *s, size_t index, char **out);

/*
 JSON records `[{dq, dt, dz, coeff}]`; free with `bj_string_free`.

 # Safety
 `s` must be a live handle; `out` must be valid.
 */
enum BjStatus bj_series_to_json(const struct BjSeries *s, char **out);

/*
 # Safety
 `s` must come from this library and not be freed twice. Null is ignored.
 */
void bj_series_free(struct BjSeries *s);

/*
 Builds a GFP with repetition bound `k` from its two rows.

 # Safety
 Row pointers must reference `*_len` values (may be null when the length is 0).
 */
enum BjStatus bj_gfp_new(uint32_t k,
                         const uint32_t *top,
                         size_t top_len,
                         const uint32_t *bottom,
                         size_t bottom_len,
                         struct BjGfp **out);

/*
 Parses "(a b ; c d)".

 # Safety
 `text` must be a NUL-terminated string; `out` must be valid.
 */
enum BjStatus bj_gfp_parse(const char *text, uint32_t k, struct BjGfp **out);

/*
 Offset (top length minus bottom length).

 # Safety
 `g` must be a live handle or null (returns 0).
 */
int64_t bj_gfp_offset(const struct BjGfp *g);

/*
 Weight (row count plus all entries).

 # Safety
 `g` must be a live handle or null (returns 0).
 */
uint64_t bj_gfp_weight(const struct BjGfp *g);

/*
 "(a b ; c d)"; free with `bj_string_free`.

 # Safety
 `g` must be a live handle; `out` must be valid.
 */
enum BjStatus bj_gfp_to_string(const struct BjGfp *g, char **out);

/*
 Moves a GFP to another offset of the same class mod k.

 # Safety
 `g` must be a live handle; `out` must be valid.
 */
enum BjStatus bj_gfp_phi(const struct BjGfp *g, int64_t new_offset, struct BjGfp **out);

/*
 Frobenius symbol of an ordinary partition.

 # Safety
 `parts` must reference `len` values.
 */
enum BjStatus bj_gfp_frobenius(const uint32_t *parts, size_t len, struct BjGfp **out);

/*
 # Safety
 `g` must come from this library and not be freed twice. Null is ignored.
 */
void bj_gfp_free(struct BjGfp *g);

/*
 Stood-up state of class `m` from omega_{-1}, omega_{-2}, ...

 # Safety
 `vals` must reference `len` values; `out` must be valid.
 */
enum BjStatus bj_omega_new(uint32_t k,
                           uint32_t m,
                           const uint32_t *vals,
                           size_t len,
                           struct BjOmega **out);

/*
 Number of stored sites after canonicalization.

 # Safety
 `w` must be a live handle or null (returns 0).
 */
size_t bj_omega_len(const struct BjOmega *w);

/*
 Copies up to `cap` stored values into `buf` and writes the full length to `len`.

 # Safety
 `w` must be a live handle; `buf` must hold `cap` values; `len` must be valid.
 */
enum BjStatus bj_omega_values(const struct BjOmega *w, uint32_t *buf, size_t cap, size_t *len);

/*
 # Safety
 `w` must come from this library and not be freed twice. Null is ignored.
 */
void bj_omega_free(struct BjOmega *w);

/*
 Bijection from stood-up states to GFPs.

 # Safety
 `w` must be a live handle; `out` must be valid.
 */
enum BjStatus bj_psi(const struct BjOmega *w, struct BjGfp **out);

/*
 Inverse of `bj_psi`.

 # Safety
 `g` must be a live handle; `out` must be valid.
 */
enum BjStatus bj_psi_inverse(const struct BjGfp *g, struct BjOmega **out);

/*
 Runs an identity check by id (same ids as the command line).

 # Safety
 `id` must be a NUL-terminated string; `out` must be valid.
 */
enum BjStatus bj_verify(const char *id, uint32_t order, uint32_t z_window, struct BjReport **out);

/*
 Whether both sides agreed on every compared coefficient.

 # Safety
 `r` must be a live handle or null (returns false).
 */
bool bj_report_equal(const struct BjReport *r);

/*
 Number of coefficient-series comparisons made.

 # Safety
 `r` must be a live handle or null (returns 0).
 */
size_t bj_report_comparisons(const struct BjReport *r);

/*
 Report as JSON; free with `bj_string_free`.

 # Safety
 `r` must be a live handle; `out` must be valid.
 */
enum BjStatus bj_report_to_json(const struct BjReport *r, char **out);

/*
 # Safety
 `r` must come from this library and not be freed twice. Null is ignored.
 */
void bj_report_free(struct BjReport *r);

#endif  /* BLOCKING_JACOBI_H */
