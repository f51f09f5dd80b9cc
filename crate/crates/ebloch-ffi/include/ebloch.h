#ifndef EBLOCH_H
#define EBLOCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The numeric values of the error cases agree with the exit
 * codes of the command line where they overlap.
 */
typedef enum EblochStatus {
  EblochStatus_Ok = 0,
  EblochStatus_NullArgument = 1,
  EblochStatus_InvalidInput = 2,
  EblochStatus_MathError = 3,
  EblochStatus_PrecisionExhausted = 4,
  EblochStatus_Panic = 5,
} EblochStatus;

/**
 * An element of the extended pre-Bloch group with its basis.
 */
typedef struct EblochElement EblochElement;

/**
 * A number field.
 */
typedef struct EblochField EblochField;

/**
 * A flattened triangulation.
 */
typedef struct EblochTriangulation EblochTriangulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ebloch_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ebloch_string_free(char *s);

/**
 * Parse a field document `{"poly": [...], ...}`.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out_field` writable.
 */
enum EblochStatus ebloch_field_from_json(const char *json, struct EblochField **out_field);

/**
 * # Safety
 * `field` must come from [`ebloch_field_from_json`] or be null.
 */
void ebloch_field_free(struct EblochField *field);

/**
 * Degree, signature (r1, r2) and the order of the roots of unity.
 *
 * # Safety
 * `field` must be a live handle; the outputs must be writable.
 */
enum EblochStatus ebloch_field_info(const struct EblochField *field,
                                    uint32_t *degree,
                                    uint32_t *r1,
                                    uint32_t *r2,
                                    uint64_t *roots_of_unity);

/**
 * w_F = 2 Π p^ν_p.
 *
 * # Safety
 * `field` must be a live handle and `w` writable.
 */
enum EblochStatus ebloch_field_torsion_w(const struct EblochField *field, uint64_t *w);

/**
 * Parse an element document. A `field` given as a path is resolved against
 * `base_dir` (the working directory when null).
 *
 * # Safety
 * `json` and, when not null, `base_dir` must be nul-terminated strings;
 * `out_element` must be writable.
 */
enum EblochStatus ebloch_element_from_json(const char *json,
                                           const char *base_dir,
                                           struct EblochElement **out_element);

/**
 * # Safety
 * `element` must come from [`ebloch_element_from_json`] or be null.
 */
void ebloch_element_free(struct EblochElement *element);

/**
 * Whether ν̂ vanishes; `caveat` is set when a negative answer is only
 * relative to the basis.
 *
 * # Safety
 * `element` must be a live handle; the outputs must be writable.
 */
enum EblochStatus ebloch_element_in_bhat(const struct EblochElement *element,
                                         bool *in_bhat,
                                         bool *caveat);

/**
 * Number of regulator slots: real embeddings, then one per conjugate pair.
 *
 * # Safety
 * `element` must be a live handle and `count` writable.
 */
enum EblochStatus ebloch_element_slot_count(const struct EblochElement *element, uint32_t *count);

/**
 * The regulator at `slot` as decimal strings with `digits` places; the
 * real part in [-2π², 2π²) when `symmetric`, else in [0, 4π²).
 *
 * # Safety
 * `element` must be a live handle; `re` and `im` must be writable. The
 * returned strings are released with [`ebloch_string_free`].
 */
enum EblochStatus ebloch_element_regulator(const struct EblochElement *element,
                                           uint32_t slot,
                                           uint32_t digits,
                                           bool symmetric,
                                           char **re,
                                           char **im);

/**
 * Certified lower bound for the order of the element.
 *
 * # Safety
 * `element` must be a live handle and `order` writable.
 */
enum EblochStatus ebloch_element_certify_order(const struct EblochElement *element,
                                               uint32_t digits,
                                               uint64_t *order);

/**
 * Parse a triangulation document; see [`ebloch_element_from_json`] for
 * `base_dir`.
 *
 * # Safety
 * As for [`ebloch_element_from_json`].
 */
enum EblochStatus ebloch_triangulation_from_json(const char *json,
                                                 const char *base_dir,
                                                 struct EblochTriangulation **out_tri);

/**
 * # Safety
 * `tri` must come from [`ebloch_triangulation_from_json`] or be null.
 */
void ebloch_triangulation_free(struct EblochTriangulation *tri);

/**
 * Imaginary part of the regulator at the first slot, as a decimal string.
 * Fails with `MathError` when the edge conditions do not hold or the
 * translates are odd.
 *
 * # Safety
 * `tri` must be a live handle and `im` writable.
 */
enum EblochStatus ebloch_triangulation_volume(const struct EblochTriangulation *tri,
                                              uint32_t digits,
                                              char **im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EBLOCH_H */
