#ifndef COLORSIM_H
#define COLORSIM_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Marks an uncolored vertex in `colorsim_result_colors`.
 */
#define COLORSIM_UNCOLORED UINT64_MAX

typedef enum ColorsimModel {
  COLORSIM_MODEL_CLIQUE = 0,
  COLORSIM_MODEL_MPC = 1,
  COLORSIM_MODEL_BIDDING = 2,
} ColorsimModel;

typedef enum ColorsimStatus {
  COLORSIM_STATUS_OK = 0,
  COLORSIM_STATUS_NULL_POINTER = 1,
  COLORSIM_STATUS_INVALID_ARGUMENT = 2,
  COLORSIM_STATUS_INVALID_INSTANCE = 3,
  COLORSIM_STATUS_IO = 4,
  COLORSIM_STATUS_PALETTE_EXHAUSTED = 5,
  COLORSIM_STATUS_OVERLOADED_VERTEX = 6,
  COLORSIM_STATUS_MEMORY_EXCEEDED = 7,
  COLORSIM_STATUS_QUERY_BUDGET_EXCEEDED = 8,
  COLORSIM_STATUS_UNRESOLVED = 9,
  COLORSIM_STATUS_BUFFER_TOO_SMALL = 10,
  COLORSIM_STATUS_PANIC = 11,
  COLORSIM_STATUS_OTHER = 12,
} ColorsimStatus;

/**
 * Opaque list-coloring instance.
 */
typedef struct ColorsimInstance ColorsimInstance;

/**
 * Opaque coloring plus its JSON trace.
 */
typedef struct ColorsimResult ColorsimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *colorsim_last_error(void);

/**
 * Builds a graph on `n` vertices from `m` edges stored as pairs in
 * `edges[2m]`. Every vertex gets the palette `{0, ..., Δ}`.
 *
 * # Safety
 * `edges` must point to `2 * m` readable values and `out` must be writable.
 */
enum ColorsimStatus colorsim_instance_from_edges(size_t n,
                                                 const uint32_t *edges,
                                                 size_t m,
                                                 struct ColorsimInstance **out);

/**
 * Like `colorsim_instance_from_edges` with explicit palettes in CSR form:
 * vertex `v` owns `colors[offsets[v] .. offsets[v + 1]]`.
 *
 * # Safety
 * `offsets` must hold `n + 1` values and `colors` `offsets[n]` values.
 */
enum ColorsimStatus colorsim_instance_from_lists(size_t n,
                                                 const uint32_t *edges,
                                                 size_t m,
                                                 const size_t *offsets,
                                                 const uint64_t *colors,
                                                 struct ColorsimInstance **out);

/**
 * G(n, p) with uniform `{0, ..., Δ}` palettes.
 *
 * # Safety
 * `out` must be writable.
 */
enum ColorsimStatus colorsim_instance_gnp(size_t n,
                                          double p,
                                          uint64_t seed,
                                          struct ColorsimInstance **out);

/**
 * Synthetic bidding-ready instance: degree at most `delta`, palettes of
 * `2 * delta + 1` colors.
 *
 * # Safety
 * `out` must be writable.
 */
enum ColorsimStatus colorsim_instance_good(size_t n,
                                           size_t delta,
                                           uint64_t seed,
                                           struct ColorsimInstance **out);

/**
 * # Safety
 * `instance` must come from a constructor above and not be freed.
 */
size_t colorsim_instance_n(const struct ColorsimInstance *instance);

/**
 * # Safety
 * `instance` must come from a constructor above and not be freed.
 */
size_t colorsim_instance_max_degree(const struct ColorsimInstance *instance);

/**
 * # Safety
 * `instance` must be null or come from a constructor above; it is invalid afterwards.
 */
void colorsim_instance_free(struct ColorsimInstance *instance);

/**
 * Colors `instance` with the chosen pipeline and default constants.
 * `alpha` is read by the MPC model only.
 *
 * # Safety
 * `instance` must be live and `out` writable.
 */
enum ColorsimStatus colorsim_color(const struct ColorsimInstance *instance,
                                   enum ColorsimModel model,
                                   uint64_t seed,
                                   double alpha,
                                   struct ColorsimResult **out);

/**
 * Answers one vertex through the query oracle. `probes` may be null.
 *
 * # Safety
 * `instance` must be live and `color` writable.
 */
enum ColorsimStatus colorsim_lca_color(const struct ColorsimInstance *instance,
                                       uint64_t seed,
                                       uint32_t vertex,
                                       uint64_t *color,
                                       uint64_t *probes);

/**
 * # Safety
 * `result` must be live.
 */
size_t colorsim_result_n(const struct ColorsimResult *result);

/**
 * 1 if the coloring is proper, total and respects every palette.
 *
 * # Safety
 * `result` must be live.
 */
int32_t colorsim_result_valid(const struct ColorsimResult *result);

/**
 * Copies the colors into `buf`, `COLORSIM_UNCOLORED` marking gaps.
 *
 * # Safety
 * `result` must be live and `buf` must hold `len` writable values.
 */
enum ColorsimStatus colorsim_result_colors(const struct ColorsimResult *result,
                                           uint64_t *buf,
                                           size_t len);

/**
 * JSON trace, owned by `result`.
 *
 * # Safety
 * `result` must be live; the string dies with it.
 */
const char *colorsim_result_trace(const struct ColorsimResult *result);

/**
 * # Safety
 * `result` must be null or live; it is invalid afterwards.
 */
void colorsim_result_free(struct ColorsimResult *result);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* COLORSIM_H */
