#ifndef DSC_H
#define DSC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DscStatus {
  DSC_STATUS_OK = 0,
  DSC_STATUS_NULL_POINTER = 1,
  DSC_STATUS_INVALID_ARGUMENT = 2,
  DSC_STATUS_CONFIG = 3,
  DSC_STATUS_MESH = 4,
  DSC_STATUS_NUMERICAL = 5,
  DSC_STATUS_NO_CONVERGENCE = 6,
  DSC_STATUS_IO = 7,
  DSC_STATUS_PANIC = 8,
} DscStatus;

/**
 * Cell-centred quantity selector for `dsc_simulation_read_field`.
 */
typedef enum DscField {
  DSC_FIELD_TEMPERATURE = 0,
  DSC_FIELD_VELOCITY_X = 1,
  DSC_FIELD_VELOCITY_Y = 2,
  DSC_FIELD_VELOCITY_Z = 3,
  DSC_FIELD_PRESSURE = 4,
} DscField;

/**
 * Opaque simulation handle.
 */
typedef struct DscSimulation DscSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a simulation from a configuration file. Relative paths inside
 * the file resolve against its directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DscStatus dsc_simulation_from_file(const char *path, struct DscSimulation **out);

/**
 * Creates a simulation from configuration text. `base_dir` resolves
 * relative paths and may be null for the current directory.
 *
 * # Safety
 * `toml` must be a NUL-terminated string, `base_dir` null or
 * NUL-terminated, and `out` a valid pointer.
 */
enum DscStatus dsc_simulation_from_str(const char *toml,
                                       const char *base_dir,
                                       struct DscSimulation **out);

/**
 * Releases a simulation. Null is ignored.
 *
 * # Safety
 * `sim` must come from a `dsc_simulation_from_*` call and not be used
 * afterwards.
 */
void dsc_simulation_free(struct DscSimulation *sim);

/**
 * Advances `steps` full cycles. On failure the state is left as it was
 * after the last successful cycle.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum DscStatus dsc_simulation_step(struct DscSimulation *sim, uint64_t steps);

/**
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum DscStatus dsc_simulation_cell_count(const struct DscSimulation *sim, size_t *out);

/**
 * Completed cycles and the port time level in seconds.
 *
 * # Safety
 * `sim` must be a live handle; `step` and `time` may each be null.
 */
enum DscStatus dsc_simulation_clock(const struct DscSimulation *sim, uint64_t *step, double *time);

/**
 * Copies the node values of one field into `buf`, which must hold at
 * least the cell count.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum DscStatus dsc_simulation_read_field(const struct DscSimulation *sim,
                                         enum DscField field,
                                         double *buf,
                                         size_t len);

/**
 * Writes a legacy VTK snapshot.
 *
 * # Safety
 * `sim` must be a live handle and `path` NUL-terminated.
 */
enum DscStatus dsc_simulation_write_vtk(const struct DscSimulation *sim, const char *path);

/**
 * # Safety
 * `sim` must be a live handle and `path` NUL-terminated.
 */
enum DscStatus dsc_simulation_save_checkpoint(const struct DscSimulation *sim, const char *path);

/**
 * Replaces the state with a checkpoint written for the same mesh.
 *
 * # Safety
 * `sim` must be a live handle and `path` NUL-terminated.
 */
enum DscStatus dsc_simulation_load_checkpoint(struct DscSimulation *sim, const char *path);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *dsc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dsc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DSC_H */
