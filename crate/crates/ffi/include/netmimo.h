#ifndef NETMIMO_H
#define NETMIMO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum NmStatus {
  NM_STATUS_OK = 0,
  NM_STATUS_NULL_POINTER = 1,
  NM_STATUS_INVALID_UTF8 = 2,
  NM_STATUS_INVALID_PARAMETER = 3,
  NM_STATUS_UNKNOWN_SCHEME = 4,
  NM_STATUS_DEGENERATE_CHANNEL = 5,
  NM_STATUS_INSUFFICIENT_POINTS = 6,
  NM_STATUS_PARSE = 7,
  NM_STATUS_OUT_OF_RANGE = 8,
  NM_STATUS_INTERNAL = 9,
} NmStatus;

// Opaque DoF region handle.
typedef struct NmDofRegion NmDofRegion;

// Opaque result-table handle.
typedef struct NmResultTable NmResultTable;

// One row of a result table (the scheme label is read separately).
typedef struct NmResultRow {
  double snr_db;
  double p_linear;
  double mean_sum_rate;
  double std_error;
  uint64_t trials;
  uint64_t seed;
} NmResultRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *nm_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *nm_version(void);

// Frees a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void nm_string_free(char *s);

// Zeroth-order Bessel function of the first kind.
double nm_bessel_j0(double x);

// Closed-form sum DoF of `scheme` (e.g. `"amat-apzf"`) at `(alpha1, alpha2)`.
//
// # Safety
// `scheme` must be a valid C string and `out` a valid pointer.
enum NmStatus nm_theoretical_dof(const char *scheme, double alpha1, double alpha2, double *out);

// Optimal DoF region for `(alpha1, alpha2)`.
//
// # Safety
// `out` must be a valid pointer; the handle is released with
// [`nm_dof_region_free`].
enum NmStatus nm_dof_region_new(double alpha1, double alpha2, struct NmDofRegion **out);

// # Safety
// `region` must be NULL or a live handle from [`nm_dof_region_new`].
void nm_dof_region_free(struct NmDofRegion *region);

// Number of vertices, or 0 for NULL.
//
// # Safety
// `region` must be NULL or a live handle.
size_t nm_dof_region_vertex_count(const struct NmDofRegion *region);

// Vertex `index` in counter-clockwise order from the origin.
//
// # Safety
// `region` must be a live handle, `d1`/`d2` valid pointers.
enum NmStatus nm_dof_region_vertex(const struct NmDofRegion *region,
                                   size_t index,
                                   double *d1,
                                   double *d2);

// Membership test with tolerance `tol`.
//
// # Safety
// `region` must be a live handle and `out` a valid pointer.
enum NmStatus nm_dof_region_contains(const struct NmDofRegion *region,
                                     double d1,
                                     double d2,
                                     double tol,
                                     bool *out);

// Region as JSON (`{"halfspaces":[[a1,a2,b],...],"vertices":[[d1,d2],...]}`).
// Returns NULL for a NULL handle; free with [`nm_string_free`].
//
// # Safety
// `region` must be NULL or a live handle.
char *nm_dof_region_to_json(const struct NmDofRegion *region);

// Runs the experiment described by a JSON configuration.
//
// # Safety
// `config_json` must be a valid C string and `out` a valid pointer; the
// handle is released with [`nm_result_table_free`].
enum NmStatus nm_simulate_json(const char *config_json, struct NmResultTable **out);

// Parses a result CSV.
//
// # Safety
// `csv` must be a valid C string and `out` a valid pointer.
enum NmStatus nm_result_table_from_csv(const char *csv, struct NmResultTable **out);

// # Safety
// `table` must be NULL or a live handle.
void nm_result_table_free(struct NmResultTable *table);

// Number of rows, or 0 for NULL.
//
// # Safety
// `table` must be NULL or a live handle.
size_t nm_result_table_row_count(const struct NmResultTable *table);

// Numeric fields of row `index`.
//
// # Safety
// `table` must be a live handle and `out` a valid pointer.
enum NmStatus nm_result_table_row(const struct NmResultTable *table,
                                  size_t index,
                                  struct NmResultRow *out);

// Scheme label of row `index`, or NULL when out of range; free with
// [`nm_string_free`].
//
// # Safety
// `table` must be NULL or a live handle.
char *nm_result_table_row_scheme(const struct NmResultTable *table, size_t index);

// Table in the CSV output format, or NULL for a NULL handle; free with
// [`nm_string_free`].
//
// # Safety
// `table` must be NULL or a live handle.
char *nm_result_table_to_csv(const struct NmResultTable *table);

// Fitted DoF slope of `scheme` over its top `window` SNR points.
//
// # Safety
// `table` must be a live handle, `scheme` a valid C string, `out` a valid
// pointer.
enum NmStatus nm_result_table_slope(const struct NmResultTable *table,
                                    const char *scheme,
                                    size_t window,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETMIMO_H */
