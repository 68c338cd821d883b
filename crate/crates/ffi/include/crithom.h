#ifndef CRITHOM_H
#define CRITHOM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by every entry point.  Nonnegative values mirror the
 * CLI exit contract; negative values are binding-level failures.
 */
typedef enum CrithomStatus {
  /**
   * Computation ran and every check passed.
   */
  CrithomStatus_Ok = 0,
  /**
   * Bad input: unparsable scenario, unknown command, invalid UTF-8.
   */
  CrithomStatus_Usage = 2,
  /**
   * The computation ran but a reported dimension failed to stabilize.
   */
  CrithomStatus_Unstable = 3,
  /**
   * An invariant was violated.
   */
  CrithomStatus_Violation = 4,
  /**
   * A null pointer or malformed argument reached the binding.
   */
  CrithomStatus_InvalidArgument = -1,
  /**
   * The library panicked; the handle is not usable.
   */
  CrithomStatus_Panic = -2,
} CrithomStatus;

/**
 * An opaque, heap-allocated scenario report.
 */
typedef struct CrithomReport CrithomReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Run a scenario document (JSON text) and hand back an opaque report.
 *
 * # Safety
 * `scenario_json` must be a NUL-terminated UTF-8 string; `out` must be a
 * valid pointer to a report pointer.
 */
enum CrithomStatus crithom_run_scenario(const char *scenario_json, struct CrithomReport **out);

/**
 * The report body as NUL-terminated JSON, owned by the report.
 *
 * # Safety
 * `report` must be a live pointer from `crithom_run_scenario`.
 */
const char *crithom_report_json(const struct CrithomReport *report);

/**
 * The status recorded in the report.
 *
 * # Safety
 * `report` must be a live pointer from `crithom_run_scenario`.
 */
enum CrithomStatus crithom_report_status(const struct CrithomReport *report);

/**
 * Release a report.
 *
 * # Safety
 * `report` must be a pointer from `crithom_run_scenario`, released once.
 */
void crithom_report_free(struct CrithomReport *report);

/**
 * Library version as a static NUL-terminated string.
 */
const char *crithom_version(void);

/**
 * Exact rank of a sparse rational matrix given by COO triplets with
 * decimal-string entries ("p/q" or integers).
 *
 * # Safety
 * `rows_idx`, `cols_idx`, `entries` must point to `nnz` elements each;
 * entries must be NUL-terminated strings; `out_rank` must be valid.
 */
enum CrithomStatus crithom_sparse_rank(uint64_t rows,
                                       uint64_t cols,
                                       uint64_t nnz,
                                       const uint64_t *rows_idx,
                                       const uint64_t *cols_idx,
                                       const char *const *entries,
                                       uint64_t *out_rank);

/**
 * Total twisted de Rham cohomology dimension of a potential over Q(u),
 * with the stabilization verdict in `out_stable`.
 *
 * # Safety
 * `vars` must point to `nvars` NUL-terminated variable names; `w` must be
 * a NUL-terminated polynomial expression; the out-pointers must be valid.
 */
enum CrithomStatus crithom_twisted_total_dim(const char *const *vars,
                                             uint64_t nvars,
                                             const char *w,
                                             uint64_t window,
                                             uint64_t *out_total,
                                             int *out_stable);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CRITHOM_H */
