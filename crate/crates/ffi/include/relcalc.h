#ifndef RELCALC_H
#define RELCALC_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RelcalcClass {
  RELCALC_CLASS_REGULAR = 0,
  RELCALC_CLASS_SINGULAR = 1,
  RELCALC_CLASS_MAXIMALLY_SINGULAR = 2,
  RELCALC_CLASS_MIXED = 3,
} RelcalcClass;

typedef enum RelcalcStatus {
  RELCALC_STATUS_OK = 0,
  // A required pointer argument was null.
  RELCALC_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  RELCALC_STATUS_INVALID_UTF8 = 2,
  // Malformed spec, wrong dimensions or an unmet precondition.
  RELCALC_STATUS_INPUT = 3,
  // A rank or equality decision sat too close to its tolerance.
  RELCALC_STATUS_DEGENERATE = 4,
  // The output buffer is shorter than required.
  RELCALC_STATUS_BUFFER_TOO_SMALL = 5,
  // Internal error; the handle should not be used again.
  RELCALC_STATUS_PANIC = 6,
} RelcalcStatus;

// Opaque relation handle.
typedef struct RelcalcRelation RelcalcRelation;

typedef struct RelcalcTolerances {
  double rank;
  double orth;
  double eq;
  double num;
  double var;
} RelcalcTolerances;

// Ambient dimensions and the dimensions of graph, domain, range, kernel and
// multivalued part.
typedef struct RelcalcDims {
  size_t dim_h;
  size_t dim_k;
  size_t graph;
  size_t dom;
  size_t ran;
  size_t ker;
  size_t mul;
  bool is_complex;
} RelcalcDims;

// The three properties are not exclusive; `label` picks one.
typedef struct RelcalcClassification {
  enum RelcalcClass label;
  bool is_regular;
  bool is_singular;
  bool is_maximally_singular;
} RelcalcClassification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *relcalc_version(void);

// Message for the last failed call on this thread, or null. Valid until the
// next call into the library from the same thread.
const char *relcalc_last_error(void);

struct RelcalcTolerances relcalc_tolerances_default(void);

// Builds a relation from a JSON relation spec. `tolerances` may be null for
// the defaults. On success `*out` owns a new handle.
//
// # Safety
// `json` must be a NUL-terminated string, `tolerances` null or valid, and
// `out` a valid pointer.
enum RelcalcStatus relcalc_relation_from_json(const char *json,
                                              const struct RelcalcTolerances *tolerances,
                                              struct RelcalcRelation **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `rel` must come from `relcalc_relation_from_json` and not be used afterwards.
void relcalc_relation_free(struct RelcalcRelation *rel);

// # Safety
// `rel` and `out` must be valid pointers.
enum RelcalcStatus relcalc_relation_dims(const struct RelcalcRelation *rel,
                                         struct RelcalcDims *out);

// # Safety
// `rel` and `out` must be valid pointers.
enum RelcalcStatus relcalc_classify(const struct RelcalcRelation *rel,
                                    struct RelcalcClassification *out);

// Writes the characteristic matrix `R` (order `dim_h + dim_k`) row-major
// into `re`, and its imaginary part into `im` unless `im` is null. Both
// buffers must hold `len >= (dim_h + dim_k)^2` doubles.
//
// # Safety
// `rel` must be valid; `re` (and `im` when non-null) must point to `len` doubles.
enum RelcalcStatus relcalc_characteristic_matrix(const struct RelcalcRelation *rel,
                                                 double *re,
                                                 double *im,
                                                 size_t len);

// Full analysis report as JSON. On success `*out` owns a string to be
// released with `relcalc_string_free`.
//
// # Safety
// `rel` and `out` must be valid pointers.
enum RelcalcStatus relcalc_analyze_json(const struct RelcalcRelation *rel,
                                        uint64_t seed,
                                        char **out);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void relcalc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELCALC_H */
