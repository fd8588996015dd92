#ifndef AMORPHIC_H
#define AMORPHIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum AmStatus {
  AM_STATUS_OK = 0,
  // A verification ran to completion and found a violation.
  AM_STATUS_CHECK_FAILED = 1,
  AM_STATUS_NULL_POINTER = 2,
  AM_STATUS_INVALID_UTF8 = 3,
  AM_STATUS_MALFORMED = 4,
  AM_STATUS_INVALID_SPEC = 5,
  AM_STATUS_NOT_AMORPHIC = 6,
  AM_STATUS_TRIVIAL = 7,
  AM_STATUS_INVALID_PARTITION = 8,
  AM_STATUS_STAR_NOT_PRESERVED = 9,
  AM_STATUS_NOT_CLOSED = 10,
  AM_STATUS_PRECONDITION = 11,
  AM_STATUS_PLANE = 12,
  AM_STATUS_CHARACTERS = 13,
  AM_STATUS_ARITHMETIC = 14,
  AM_STATUS_INTERNAL = 15,
} AmStatus;

// Opaque algebra handle.
typedef struct AmAlgebra AmAlgebra;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last non-OK status on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *am_last_error_message(void);

// Parses algebra JSON.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum AmStatus am_algebra_from_json(const char *json, struct AmAlgebra **out);

// Canonical JSON of an algebra. Free the result with [`am_string_free`].
//
// # Safety
// `a` must be a live handle and `out` a writable pointer.
enum AmStatus am_algebra_to_json(const struct AmAlgebra *a, char **out);

// Dimension of the algebra, or 0 for a null handle.
//
// # Safety
// `a` must be NULL or a live handle.
size_t am_algebra_dim(const struct AmAlgebra *a);

// Builds the amorphic algebra of a degree spec given as
// `{"D": ["p/q", ...], "epsilon": 1}`.
//
// # Safety
// `spec_json` must be a NUL-terminated string and `out` a writable pointer.
enum AmStatus am_construct(const char *spec_json, struct AmAlgebra **out);

// Homogeneous algebra with `d = sqrt(n) + epsilon`; `n` is a rational
// string such as `"16"`.
//
// # Safety
// `n` must be a NUL-terminated string and `out` a writable pointer.
enum AmStatus am_generalized_affine(const char *n, int8_t epsilon, struct AmAlgebra **out);

// Algebra of the affine plane of prime order `q`, computed from its
// incidence matrices.
//
// # Safety
// `out` must be a writable pointer.
enum AmStatus am_realize_affine(uint64_t q, struct AmAlgebra **out);

// Checks the axioms and associativity, plus the amorphic criterion and
// table condition when requested. Returns `AM_STATUS_CHECK_FAILED` when a
// check fails. If `report_out` is not NULL it receives the JSON report.
//
// # Safety
// `a` must be a live handle; `report_out` must be NULL or writable.
enum AmStatus am_verify(const struct AmAlgebra *a, bool amorphic, bool table, char **report_out);

// Writes whether the algebra satisfies the amorphic criterion.
//
// # Safety
// `a` must be a live handle and `out` a writable pointer.
enum AmStatus am_is_amorphic(const struct AmAlgebra *a, bool *out);

// Recovers the degree spec as JSON.
//
// # Safety
// `a` must be a live handle and `out` a writable pointer.
enum AmStatus am_recover_spec(const struct AmAlgebra *a, char **out);

// Fuses along `{"classes": [[...], ...]}`. Returns `AM_STATUS_NOT_CLOSED`
// when the partition does not give a subalgebra.
//
// # Safety
// `a` must be a live handle, `partition_json` a NUL-terminated string and
// `out` a writable pointer.
enum AmStatus am_fuse(const struct AmAlgebra *a,
                      const char *partition_json,
                      struct AmAlgebra **out);

// Character table `{"labels", "P", "Q", "dual_degrees"}` as JSON.
//
// # Safety
// `a` must be a live handle and `out` a writable pointer.
enum AmStatus am_characters(const struct AmAlgebra *a, uint64_t seed, char **out);

// Dual algebra on the characters of a commutative symmetric algebra.
//
// # Safety
// `a` must be a live handle and `out` a writable pointer.
enum AmStatus am_dual(const struct AmAlgebra *a, uint64_t seed, struct AmAlgebra **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `a` must be NULL or a handle not yet freed.
void am_algebra_free(struct AmAlgebra *a);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must be NULL or a string from this library not yet freed.
void am_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AMORPHIC_H */
