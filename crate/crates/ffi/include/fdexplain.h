#ifndef FDEXPLAIN_H
#define FDEXPLAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FdxStatus {
  FDX_STATUS_OK = 0,
  FDX_STATUS_NULL_POINTER = 1,
  FDX_STATUS_INVALID_UTF8 = 2,
  FDX_STATUS_PARSE = 3,
  FDX_STATUS_NOT_FOUND = 4,
  FDX_STATUS_INVALID_ARGUMENT = 5,
  /**
   * The value is still in the closure, so no explanation exists.
   */
  FDX_STATUS_NOT_WITHDRAWN = 6,
  FDX_STATUS_BUFFER_TOO_SMALL = 7,
  FDX_STATUS_INTERNAL = 8,
  FDX_STATUS_PANIC = 9,
} FdxStatus;

typedef enum FdxMode {
  FDX_MODE_FULL = 0,
  FDX_MODE_BOUNDS = 1,
} FdxMode;

typedef enum FdxStrategy {
  FDX_STRATEGY_WORKLIST = 0,
  FDX_STRATEGY_ROUND_ROBIN = 1,
  /**
   * Seeded uniform choice; uses the `seed` argument.
   */
  FDX_STRATEGY_RANDOM = 2,
} FdxStrategy;

typedef enum FdxFormat {
  FDX_FORMAT_TEXT = 0,
  FDX_FORMAT_DOT = 1,
} FdxFormat;

/**
 * A parsed model together with its reduction rules.
 */
typedef struct FdxModel FdxModel;

/**
 * The outcome of one iteration: closure, status and withdrawal trace.
 */
typedef struct FdxResult FdxResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread. Empty after a successful call.
 *
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *fdx_last_error_message(void);

/**
 * Parses `source` and builds its rules in `mode`.
 *
 * Bounds mode applies to offset equalities; other constraints keep their full rules.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out_model` a valid pointer.
 */
enum FdxStatus fdx_model_parse(const char *source, enum FdxMode mode, struct FdxModel **out_model);

/**
 * # Safety
 * `model` must come from [`fdx_model_parse`] and not be freed twice. Null is ignored.
 */
void fdx_model_free(struct FdxModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out_count` a valid pointer.
 */
enum FdxStatus fdx_model_var_count(const struct FdxModel *model, size_t *out_count);

/**
 * # Safety
 * `model` must be a live handle and `out_count` a valid pointer.
 */
enum FdxStatus fdx_model_rule_count(const struct FdxModel *model, size_t *out_count);

/**
 * Index of the variable called `name`, as used by the domain accessors.
 *
 * # Safety
 * `model` must be a live handle, `name` NUL-terminated and `out_index` valid.
 */
enum FdxStatus fdx_model_var_index(const struct FdxModel *model,
                                   const char *name,
                                   size_t *out_index);

/**
 * Name of variable `index`, as a new string.
 *
 * # Safety
 * `model` must be a live handle and `out_name` valid.
 */
enum FdxStatus fdx_model_var_name(const struct FdxModel *model, size_t index, char **out_name);

/**
 * Runs the rules to their closure (or to the first empty domain if `stop_on_failure`).
 *
 * `seed` is read only for [`FdxStrategy::Random`].
 *
 * # Safety
 * `model` must be a live handle and `out_result` valid.
 */
enum FdxStatus fdx_propagate(const struct FdxModel *model,
                             enum FdxStrategy strategy,
                             uint64_t seed,
                             bool stop_on_failure,
                             struct FdxResult **out_result);

/**
 * # Safety
 * `result` must come from [`fdx_propagate`] and not be freed twice. Null is ignored.
 */
void fdx_result_free(struct FdxResult *result);

/**
 * Whether the run stopped on an empty domain, and which variable emptied.
 *
 * `out_var` is left untouched when the run closed.
 *
 * # Safety
 * `result` must be a live handle; `out_failed` valid; `out_var` valid or null.
 */
enum FdxStatus fdx_result_failed(const struct FdxResult *result, bool *out_failed, size_t *out_var);

/**
 * Number of rule applications in the run.
 *
 * # Safety
 * `result` must be a live handle and `out_steps` valid.
 */
enum FdxStatus fdx_result_steps(const struct FdxResult *result, size_t *out_steps);

/**
 * Copies the final domain of variable `index` into `values`, ascending.
 *
 * `out_len` always receives the domain size. If `capacity` is too small nothing is
 * copied and `FDX_STATUS_BUFFER_TOO_SMALL` is returned; `values` may be null to query
 * the size.
 *
 * # Safety
 * `result` must be a live handle, `out_len` valid, and `values` point to `capacity` slots.
 */
enum FdxStatus fdx_result_domain(const struct FdxResult *result,
                                 size_t index,
                                 int64_t *values,
                                 size_t capacity,
                                 size_t *out_len);

/**
 * Explanation of why `value` left the domain of `var` during this run.
 *
 * Returns `FDX_STATUS_NOT_WITHDRAWN` when the run kept the value.
 *
 * # Safety
 * `result` must be a live handle, `var` NUL-terminated and `out_text` valid.
 */
enum FdxStatus fdx_result_explain(const struct FdxResult *result,
                                  const char *var,
                                  int64_t value,
                                  enum FdxFormat format,
                                  char **out_text);

/**
 * The withdrawal trace as tab-separated `step rule var=value arc` lines.
 *
 * # Safety
 * `result` must be a live handle and `out_text` valid.
 */
enum FdxStatus fdx_result_trace(const struct FdxResult *result, char **out_text);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is ignored.
 */
void fdx_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FDEXPLAIN_H */
