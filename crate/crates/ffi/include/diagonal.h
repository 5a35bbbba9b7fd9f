#ifndef DIAGONAL_H
#define DIAGONAL_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DfdMode {
  DFD_MODE_PRIMARY = 0,
  DFD_MODE_COMPLETE = 1,
} DfdMode;

typedef enum DfdPipeline {
  DFD_PIPELINE_LIPSHITZ = 0,
  DFD_PIPELINE_GESSEL = 1,
} DfdPipeline;

typedef enum DfdStatus {
  DFD_STATUS_OK = 0,
  DFD_STATUS_NULL_POINTER = 1,
  DFD_STATUS_INVALID_UTF8 = 2,
  DFD_STATUS_PARSE = 3,
  DFD_STATUS_INVALID_ARGUMENT = 4,
  DFD_STATUS_INVALID_SYSTEM = 5,
  /**
   * No operator found within the search limits, or the bound-size system has no kernel.
   */
  DFD_STATUS_INFEASIBLE = 6,
  /**
   * The series is too short for the requested check.
   */
  DFD_STATUS_TRUNCATION = 7,
  DFD_STATUS_INTERNAL = 8,
  DFD_STATUS_PANIC = 9,
} DfdStatus;

typedef enum DfdStrategy {
  DFD_STRATEGY_MINIMAL = 0,
  DFD_STRATEGY_BOUND = 1,
} DfdStrategy;

/**
 * A JSON report with its verdict.
 */
typedef struct DfdReport DfdReport;

/**
 * A parsed D-finite system.
 */
typedef struct DfdSystem DfdSystem;

typedef struct DfdDiagOptions {
  enum DfdPipeline pipeline;
  enum DfdMode mode;
  enum DfdStrategy strategy;
  /**
   * Order of the diagonal checked by verification.
   */
  uint32_t trunc;
  uint32_t max_n;
  size_t max_unknowns;
} DfdDiagOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the next failing call.
 */
const char *dfd_last_error(void);

/**
 * Library version as a static string.
 */
const char *dfd_version(void);

struct DfdDiagOptions dfd_diag_options_default(void);

/**
 * Parse a system document (`variables` plus `rational` or `operators`).
 *
 * # Safety
 * `json` must be a valid C string and `out` a valid pointer.
 */
enum DfdStatus dfd_system_from_json(const char *json, struct DfdSystem **out);

/**
 * # Safety
 * `sys` must come from [`dfd_system_from_json`] and not be used afterwards. Null is ignored.
 */
void dfd_system_free(struct DfdSystem *sys);

/**
 * Number of variables, or 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t dfd_system_num_vars(const struct DfdSystem *sys);

/**
 * Construct and verify an annihilator of the diagonal.
 *
 * # Safety
 * `sys` must be a live handle, `opts` and `out` valid pointers.
 */
enum DfdStatus dfd_diag(const struct DfdSystem *sys,
                        const struct DfdDiagOptions *opts,
                        struct DfdReport **out);

/**
 * Truncated diagonal through order `trunc` (primary: first two variables).
 *
 * # Safety
 * `sys` must be a live handle and `out` a valid pointer.
 */
enum DfdStatus dfd_oracle(const struct DfdSystem *sys,
                          enum DfdMode mode,
                          uint32_t trunc,
                          struct DfdReport **out);

/**
 * Check the operator of `operator_json` (a report or `{variables, operator}`) against
 * the series document `series_json`. The report's verdict carries the outcome.
 *
 * # Safety
 * Both strings must be valid C strings and `out` a valid pointer.
 */
enum DfdStatus dfd_verify(const char *operator_json,
                          const char *series_json,
                          struct DfdReport **out);

/**
 * Bounds for the primary diagonal of a bivariate system.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum DfdStatus dfd_bounds_primary(uint32_t d1,
                                  uint32_t d2,
                                  uint32_t r1,
                                  uint32_t r2,
                                  struct DfdReport **out);

/**
 * Bounds for the complete diagonal; `d` and `r` hold `n` entries each.
 *
 * # Safety
 * `d` and `r` must point to `n` readable values and `out` must be valid.
 */
enum DfdStatus dfd_bounds_complete(size_t n,
                                   const uint32_t *d,
                                   const uint32_t *r,
                                   struct DfdReport **out);

/**
 * Exponents `(u, v, s, t)` of the `k`-times iterated diagonal.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum DfdStatus dfd_bounds_iterated(uint32_t k, struct DfdReport **out);

/**
 * The report as JSON, owned by `report`. Null for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
const char *dfd_report_json(const struct DfdReport *report);

/**
 * 1 if the report's verdict passed (or it carries none), 0 otherwise.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int32_t dfd_report_passed(const struct DfdReport *report);

/**
 * # Safety
 * `report` must be null or a handle not used afterwards.
 */
void dfd_report_free(struct DfdReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIAGONAL_H */
