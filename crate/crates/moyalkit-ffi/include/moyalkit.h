/* C interface to the moyalkit phase-space quantization toolkit. */

#ifndef MOYALKIT_H
#define MOYALKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirrored in the generated header.
 */
typedef enum MkStatus {
  MkStatus_Ok = 0,
  MkStatus_NullArgument = 1,
  MkStatus_InvalidArgument = 2,
  MkStatus_IoError = 3,
  MkStatus_NumericalError = 4,
  MkStatus_VerifyFailed = 5,
} MkStatus;

/**
 * Opaque sampled field with its context.
 */
typedef struct MkField MkField;

/**
 * Copies the most recent error message on this thread into `buf`
 * (truncated, always NUL-terminated). Returns the message length.
 */
uintptr_t mk_last_error(char *buf, uintptr_t len);

/**
 * Reads an MKF1 field file. Returns null on failure.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
struct MkField *mk_field_read(const char *path);

/**
 * Writes a field as MKF1.
 *
 * # Safety
 * `field` must originate from this library and `path` must be a valid
 * NUL-terminated string.
 */
enum MkStatus mk_field_write(const struct MkField *field, const char *path);

/**
 * Builds a builtin field: `name` as in scenario files ("gaussian",
 * "phase_gaussian", "triangle", "plateau_harmonic", ...), with `dims` axes
 * of `points` nodes and extent `extent`. `params`/`values` supply `n_params`
 * named numeric parameters.
 *
 * # Safety
 * `name` must be NUL-terminated; `params` and `values` must point to
 * `n_params` valid entries.
 */
struct MkField *mk_field_builtin(const char *name,
                                 uintptr_t dims,
                                 uintptr_t points,
                                 double extent,
                                 double hbar,
                                 const char *const *params,
                                 const double *values,
                                 uintptr_t n_params);

/**
 * # Safety
 * `field` must be a pointer previously returned by this library (or null).
 */
void mk_field_free(struct MkField *field);

/**
 * Number of complex values in the field (N^d).
 *
 * # Safety
 * `field` must originate from this library.
 */
uintptr_t mk_field_len(const struct MkField *field);

/**
 * Grid descriptor: writes dims, points and the axis-0 extent.
 *
 * # Safety
 * All pointers must be valid or null.
 */
enum MkStatus mk_field_info(const struct MkField *field,
                            uintptr_t *dims,
                            uintptr_t *points,
                            double *extent,
                            double *hbar);

/**
 * Copies the payload as interleaved (re, im) pairs; `out` must hold
 * 2 * mk_field_len doubles.
 *
 * # Safety
 * `out` must point to enough writable memory.
 */
enum MkStatus mk_field_data(const struct MkField *field, double *out);

/**
 * Cross-Wigner transform of psi against phi (both configuration-space).
 *
 * # Safety
 * Handles must originate from this library.
 */
struct MkField *mk_cross_wigner(const struct MkField *psi, const struct MkField *phi);

/**
 * Windowed wave-packet transform (phi is L2-normalized internally).
 *
 * # Safety
 * Handles must originate from this library.
 */
struct MkField *mk_wave_packet(const struct MkField *phi, const struct MkField *psi);

/**
 * Moyal product of two phase-space symbols.
 *
 * # Safety
 * Handles must originate from this library.
 */
struct MkField *mk_moyal_star(const struct MkField *a, const struct MkField *b);

/**
 * Lowest `count` eigenvalues of the hermitian part of the Weyl quantization
 * of symbol `a`, written into `out`.
 *
 * # Safety
 * `out` must hold `count` doubles.
 */
enum MkStatus mk_weyl_spectrum(const struct MkField *a, double *out, uintptr_t count);

/**
 * Modulation-norm estimate: symbol-class norm for d = 2 fields, the
 * wavefunction norm (parameters q > 0; q <= 0 means the sup norm) for d = 1.
 *
 * # Safety
 * `value` and `tail` must be valid or null.
 */
enum MkStatus mk_norm(const struct MkField *field, double q, double s, double *value, double *tail);

/**
 * Propagates Psi0 under H to time t with step dt (dt <= 0 picks the largest
 * admissible step). Returns the evolved field.
 *
 * # Safety
 * Handles must originate from this library.
 */
struct MkField *mk_propagate(const struct MkField *h,
                             const struct MkField *psi0,
                             double t,
                             double dt);

/**
 * Runs the scenario-driven verification battery from a TOML file path and
 * returns Ok / VerifyFailed.
 *
 * # Safety
 * `_config` must be NUL-terminated or null (the battery ignores it today;
 * the argument is reserved for scenario-scoped batteries).
 */
enum MkStatus mk_verify(const char *_config);

#endif /* MOYALKIT_H */
