#ifndef VCONT_H
#define VCONT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VcontStatus {
  VCONT_STATUS_OK = 0,
  VCONT_STATUS_NULL_POINTER = 1,
  VCONT_STATUS_INVALID_INPUT = 2,
  VCONT_STATUS_DIMENSION_MISMATCH = 3,
  VCONT_STATUS_VALIDATION = 4,
  VCONT_STATUS_UNBALANCED = 5,
  VCONT_STATUS_TOO_LARGE = 6,
  VCONT_STATUS_INTERNAL = 7,
  VCONT_STATUS_PANIC = 8,
} VcontStatus;

/*
 A real function on a product of two spaces.
 */
typedef struct VcontFunction VcontFunction;

/*
 A subset of a product of two spaces.
 */
typedef struct VcontSet VcontSet;

/*
 A finite probability space.
 */
typedef struct VcontSpace VcontSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next `vcont_*` call on this thread.
 */
const char *vcont_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *vcont_version(void);

/*
 Creates a space with unlabelled atoms.

 # Safety
 `weights` must point to `len` readable doubles and `out` must be writable.
 */
enum VcontStatus vcont_space_new(const double *weights,
                                 size_t len,
                                 double tol,
                                 struct VcontSpace **out);

/*
 Number of atoms; 0 for a null handle.

 # Safety
 `space` must be null or a live handle from `vcont_space_new`.
 */
size_t vcont_space_len(const struct VcontSpace *space);

/*
 # Safety
 `space` must be null or a live handle from `vcont_space_new`, freed once.
 */
void vcont_space_free(struct VcontSpace *space);

/*
 Creates `f` on `x × y` from `len = |x|·|y|` row-major values.

 # Safety
 `x` and `y` must be live space handles, `values` must point to `len`
 readable doubles and `out` must be writable.
 */
enum VcontStatus vcont_function_new(const struct VcontSpace *x,
                                    const struct VcontSpace *y,
                                    const double *values,
                                    size_t len,
                                    struct VcontFunction **out);

/*
 # Safety
 `f` must be null or a live handle from `vcont_function_new`, freed once.
 */
void vcont_function_free(struct VcontFunction *f);

/*
 Creates `Z ⊂ x × y`; a nonzero byte marks a member cell.

 # Safety
 `x` and `y` must be live space handles, `members` must point to `len`
 readable bytes and `out` must be writable.
 */
enum VcontStatus vcont_set_new(const struct VcontSpace *x,
                               const struct VcontSpace *y,
                               const uint8_t *members,
                               size_t len,
                               struct VcontSet **out);

/*
 # Safety
 `set` must be null or a live handle from `vcont_set_new`, freed once.
 */
void vcont_set_free(struct VcontSet *set);

/*
 Thickness of `set`.

 # Safety
 `set` must be a live handle and `out_value` writable.
 */
enum VcontStatus vcont_thickness(const struct VcontSet *set, double *out_value);

/*
 Largest mass a bistochastic plan puts on `set`. When `plan_out` is not
 null it receives the `|x|·|y|` row-major plan.

 # Safety
 `set` must be a live handle, `out_mass` writable and `plan_out` null or
 writable for `plan_len` doubles.
 */
enum VcontStatus vcont_hall_mass(const struct VcontSet *set,
                                 double *out_mass,
                                 double *plan_out,
                                 size_t plan_len);

/*
 Regulator norm of `f` and the duality gap of its certificates.

 # Safety
 `f` must be a live handle; `out_value` writable; `out_gap` null or
 writable.
 */
enum VcontStatus vcont_sr_norm(const struct VcontFunction *f, double *out_value, double *out_gap);

/*
 Integral over levels of the thickness of the level sets of `|f|`.

 # Safety
 `f` must be a live handle and `out_value` writable.
 */
enum VcontStatus vcont_layer_cake(const struct VcontFunction *f, double *out_value);

/*
 Distance in thickness between `f` and `g`.

 # Safety
 `f` and `g` must be live handles and `out_value` writable.
 */
enum VcontStatus vcont_tau_distance(const struct VcontFunction *f,
                                    const struct VcontFunction *g,
                                    double *out_value);

/*
 Least partition error with `classes` blocks per side; `out_exact`
 reports whether the value is exact or a heuristic upper bound.

 # Safety
 `f` must be a live handle; `out_value` and `out_exact` writable.
 */
enum VcontStatus vcont_vc_profile(const struct VcontFunction *f,
                                  size_t classes,
                                  double *out_value,
                                  bool *out_exact);

/*
 Optimal transport cost between `mu1` and `mu2` under the semimetric
 `dist` on `space`. When `potential_out` is not null it receives a
 1-Lipschitz optimal potential.

 # Safety
 `space` must be a live handle; `dist` readable for `dist_len` doubles;
 `mu1`, `mu2` readable for `len` doubles; `out_cost` writable;
 `potential_out` null or writable for `len` doubles.
 */
enum VcontStatus vcont_kantorovich(const struct VcontSpace *space,
                                   const double *dist,
                                   size_t dist_len,
                                   const double *mu1,
                                   const double *mu2,
                                   size_t len,
                                   double *out_cost,
                                   double *potential_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VCONT_H */
