/* freqdec C API — generated by cbindgen, do not edit. */

#ifndef FREQDEC_H
#define FREQDEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible FFI call.
 */
typedef enum FqdStatus {
  FQD_STATUS_OK = 0,
  FQD_STATUS_INVALID_ARGUMENT = 1,
  FQD_STATUS_SHAPE_MISMATCH = 2,
  FQD_STATUS_IO_ERROR = 3,
  FQD_STATUS_FORMAT_ERROR = 4,
  FQD_STATUS_NUMERIC_ERROR = 5,
  FQD_STATUS_NULL_POINTER = 6,
  FQD_STATUS_PANIC = 7,
} FqdStatus;

/**
 * Opaque multi-channel volume handle.
 */
typedef struct FqdVolume FqdVolume;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code. Never null.
 */
const char *fqd_status_message(enum FqdStatus status);

/**
 * Library version string (static, never null).
 */
const char *fqd_version(void);

/**
 * Create a volume from a dense f64 buffer laid out channel-major as
 * (channels, depth, height, width).
 *
 * # Safety
 * `data` must point to `channels * depth * height * width` doubles;
 * `out` must be a valid pointer.
 */
enum FqdStatus fqd_volume_create(size_t channels,
                                 size_t depth,
                                 size_t height,
                                 size_t width,
                                 const double *data,
                                 struct FqdVolume **out);

/**
 * Generate a deterministic phantom volume.
 *
 * # Safety
 * `kind` must be a NUL-terminated string; `out` must be valid.
 */
enum FqdStatus fqd_phantom(const char *kind,
                           size_t depth,
                           size_t height,
                           size_t width,
                           uint64_t seed,
                           size_t modalities,
                           struct FqdVolume **out);

/**
 * Read a FREQVOL1 (.fv) or NIfTI-1 (.nii) file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be valid.
 */
enum FqdStatus fqd_volume_read(const char *path, struct FqdVolume **out);

/**
 * Write a volume as a FREQVOL1 (.fv) file.
 *
 * # Safety
 * `vol` must be a live handle; `path` must be NUL-terminated.
 */
enum FqdStatus fqd_volume_write(const struct FqdVolume *vol, const char *path);

/**
 * Query the shape of a volume. Any out-pointer may be null to skip it.
 *
 * # Safety
 * `vol` must be a live handle.
 */
enum FqdStatus fqd_volume_shape(const struct FqdVolume *vol,
                                size_t *channels,
                                size_t *depth,
                                size_t *height,
                                size_t *width);

/**
 * Copy one channel into a caller-owned buffer of depth*height*width doubles.
 *
 * # Safety
 * `vol` must be live; `out` must hold depth*height*width doubles.
 */
enum FqdStatus fqd_volume_channel_data(const struct FqdVolume *vol, size_t channel, double *out);

/**
 * Release a volume handle (null is a no-op).
 *
 * # Safety
 * `vol` must come from this library and not be freed twice.
 */
void fqd_volume_free(struct FqdVolume *vol);

/**
 * Frequency-domain decomposition: split the input (channels = modalities)
 * into low- and high-frequency stacks. Strategies are "dwt", "dtcwt", or
 * "nsct"; `levels`/`dirs` configure the contourlet.
 *
 * # Safety
 * `vol` must be live; strategy strings NUL-terminated; out-pointers valid.
 */
enum FqdStatus fqd_fdd_decompose(const struct FqdVolume *vol,
                                 const char *lf_strategy,
                                 const char *hf_strategy,
                                 size_t levels,
                                 size_t dirs,
                                 struct FqdVolume **out_l,
                                 struct FqdVolume **out_h);

/**
 * Spectral entropy of one channel.
 *
 * # Safety
 * `vol` must be live; `out` valid.
 */
enum FqdStatus fqd_freq_entropy(const struct FqdVolume *vol, size_t channel, double *out);

/**
 * Dice overlap (percent) between channel 0 of two volumes interpreted as
 * integer label maps with `n_classes` classes.
 *
 * # Safety
 * Both handles must be live; `out` valid.
 */
enum FqdStatus fqd_dice(const struct FqdVolume *pred,
                        const struct FqdVolume *gt,
                        uint16_t cls,
                        size_t n_classes,
                        double *out);

/**
 * 95th-percentile symmetric boundary distance between channel 0 of two
 * label volumes, with voxel spacing in (depth, height, width) order.
 *
 * # Safety
 * Both handles must be live; `out` valid.
 */
enum FqdStatus fqd_hd95(const struct FqdVolume *pred,
                        const struct FqdVolume *gt,
                        uint16_t cls,
                        size_t n_classes,
                        double spacing_d,
                        double spacing_h,
                        double spacing_w,
                        double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* FREQDEC_H */
