#ifndef WQEI_H
#define WQEI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum WqeiStatus {
  WQEI_STATUS_OK = 0,
  WQEI_STATUS_NULL_POINTER = 1,
  WQEI_STATUS_INVALID_ARGUMENT = 2,
  WQEI_STATUS_IO = 3,
  WQEI_STATUS_INVALID_DATA = 4,
  WQEI_STATUS_COMPUTATION = 5,
  WQEI_STATUS_BUFFER_TOO_SMALL = 6,
  WQEI_STATUS_PANIC = 7,
} WqeiStatus;

/**
 * A computed index raster. Opaque to C.
 */
typedef struct WqeiRaster WqeiRaster;

/**
 * A loaded scene. Opaque to C.
 */
typedef struct WqeiScene WqeiScene;

/**
 * The four index coefficients.
 */
typedef struct WqeiCoefficients {
  double alpha;
  double beta;
  double gamma;
  double theta;
} WqeiCoefficients;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null when the last
 * call succeeded. Valid until the next call into this library.
 */
const char *wqei_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wqei_version(void);

/**
 * Published coefficient values.
 */
struct WqeiCoefficients wqei_coefficients_published(void);

/**
 * Loads the scene directory at `path` into `*out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum WqeiStatus wqei_scene_load(const char *path, struct WqeiScene **out);

/**
 * Pan-sharpens `scene` with equal Brovey weights into a new scene.
 *
 * # Safety
 * `scene` must come from this library and `out` be writable.
 */
enum WqeiStatus wqei_scene_pansharpen(const struct WqeiScene *scene, struct WqeiScene **out);

/**
 * Grid size of the multispectral bands.
 *
 * # Safety
 * `scene` must come from this library; `width` and `height` be writable.
 */
enum WqeiStatus wqei_scene_dims(const struct WqeiScene *scene, size_t *width, size_t *height);

/**
 * Releases a scene. Null is ignored.
 *
 * # Safety
 * `scene` must come from this library and not be used afterwards.
 */
void wqei_scene_free(struct WqeiScene *scene);

/**
 * `WQEI_T` over the whole scene, with the denominator taken from the scene.
 *
 * # Safety
 * `scene` must come from this library, `coeffs` be readable and `out` writable.
 */
enum WqeiStatus wqei_compute_t(const struct WqeiScene *scene,
                               const struct WqeiCoefficients *coeffs,
                               struct WqeiRaster **out);

/**
 * `WQEI_C` over the whole scene, clamped to [-1, 1].
 *
 * # Safety
 * `scene` must come from this library, `coeffs` be readable and `out` writable.
 */
enum WqeiStatus wqei_compute_c(const struct WqeiScene *scene,
                               const struct WqeiCoefficients *coeffs,
                               struct WqeiRaster **out);

/**
 * Raster size and the number of pixels moved by clamping.
 *
 * # Safety
 * `raster` must come from this library; each out pointer may be null.
 */
enum WqeiStatus wqei_raster_info(const struct WqeiRaster *raster,
                                 size_t *width,
                                 size_t *height,
                                 size_t *clamp_count);

/**
 * Copies the row-major pixels into `buf`, nodata as NaN. `len` must be at
 * least width * height.
 *
 * # Safety
 * `raster` must come from this library and `buf` hold `len` writable doubles.
 */
enum WqeiStatus wqei_raster_copy(const struct WqeiRaster *raster, double *buf, size_t len);

/**
 * Releases a raster. Null is ignored.
 *
 * # Safety
 * `raster` must come from this library and not be used afterwards.
 */
void wqei_raster_free(struct WqeiRaster *raster);

/**
 * Pearson correlation of two series of length `n`.
 *
 * # Safety
 * `x` and `y` must hold `n` readable doubles and `out` be writable.
 */
enum WqeiStatus wqei_pearson(const double *x, const double *y, size_t n, double *out);

/**
 * Mean squared error between `y` and `yhat`, both of length `n`.
 *
 * # Safety
 * `y` and `yhat` must hold `n` readable doubles and `out` be writable.
 */
enum WqeiStatus wqei_mse(const double *y, const double *yhat, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WQEI_H */
