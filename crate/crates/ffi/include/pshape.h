#ifndef PSHAPE_H
#define PSHAPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PshapeStatus {
  PSHAPE_STATUS_OK = 0,
  PSHAPE_STATUS_NULL_POINTER = 1,
  PSHAPE_STATUS_INVALID_ARGUMENT = 2,
  PSHAPE_STATUS_PARSE = 3,
  PSHAPE_STATUS_CONFIG = 4,
  PSHAPE_STATUS_IO = 5,
  PSHAPE_STATUS_MESH = 6,
  PSHAPE_STATUS_SOLVER = 7,
  PSHAPE_STATUS_NON_CONVERGENCE = 8,
  PSHAPE_STATUS_BUFFER_TOO_SMALL = 9,
  PSHAPE_STATUS_PANIC = 10,
} PshapeStatus;

/**
 * How an optimization run ended.
 */
typedef enum PshapeExit {
  PSHAPE_EXIT_CONVERGED = 0,
  PSHAPE_EXIT_STALLED = 1,
  PSHAPE_EXIT_MAX_STEPS = 2,
  /**
   * The run was aborted by an error.
   */
  PSHAPE_EXIT_ABORTED = 3,
} PshapeExit;

/**
 * Optimization parameters.
 */
typedef struct PshapeConfig PshapeConfig;

/**
 * A triangle mesh with boundary markers.
 */
typedef struct PshapeMesh PshapeMesh;

/**
 * Log of an optimization run.
 */
typedef struct PshapeRunLog PshapeRunLog;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *pshape_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pshape_version(void);

/**
 * Default configuration.
 */
struct PshapeConfig *pshape_config_new(void);

/**
 * Parses a `key = value` configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PshapeStatus pshape_config_from_file(const char *path, struct PshapeConfig **out);

/**
 * Parses configuration text in the file format.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PshapeStatus pshape_config_from_string(const char *source, struct PshapeConfig **out);

/**
 * # Safety
 * `config` must come from this library; `path` must be NUL-terminated.
 */
enum PshapeStatus pshape_config_set_output_dir(struct PshapeConfig *config, const char *path);

/**
 * # Safety
 * `config` must come from this library.
 */
enum PshapeStatus pshape_config_set_max_steps(struct PshapeConfig *config, size_t max_steps);

/**
 * # Safety
 * `config` must come from this library.
 */
enum PshapeStatus pshape_config_set_levels(struct PshapeConfig *config, size_t levels);

/**
 * # Safety
 * `config` must come from this library or be NULL; it must not be used
 * afterwards.
 */
void pshape_config_free(struct PshapeConfig *config);

/**
 * Runs the optimization and writes the outputs to the configured
 * directory. A log is stored in `out` even when the run aborts, holding
 * the steps completed before the error.
 *
 * # Safety
 * `config` must come from this library and `out` must be a valid pointer.
 */
enum PshapeStatus pshape_optimize(const struct PshapeConfig *config, struct PshapeRunLog **out);

/**
 * # Safety
 * `log` must come from this library.
 */
enum PshapeExit pshape_runlog_exit(const struct PshapeRunLog *log);

/**
 * Number of accepted steps (0 for NULL).
 *
 * # Safety
 * `log` must come from this library or be NULL.
 */
size_t pshape_runlog_step_count(const struct PshapeRunLog *log);

/**
 * Number of rejected trial steps (0 for NULL).
 *
 * # Safety
 * `log` must come from this library or be NULL.
 */
size_t pshape_runlog_rejected_count(const struct PshapeRunLog *log);

/**
 * Objective on the initial geometry.
 *
 * # Safety
 * `log` must come from this library and `value` must be a valid pointer.
 */
enum PshapeStatus pshape_runlog_initial_objective(const struct PshapeRunLog *log, double *value);

/**
 * Objective after accepted step `index` (0-based).
 *
 * # Safety
 * `log` must come from this library and `value` must be a valid pointer.
 */
enum PshapeStatus pshape_runlog_objective(const struct PshapeRunLog *log,
                                          size_t index,
                                          double *value);

/**
 * # Safety
 * `log` must come from this library or be NULL; it must not be used
 * afterwards.
 */
void pshape_runlog_free(struct PshapeRunLog *log);

/**
 * Benchmark channel `[-length/2, length/2] x [-height/2, height/2]` around
 * a centered square obstacle, refined `levels` times.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PshapeStatus pshape_mesh_benchmark(double length,
                                        double height,
                                        double obstacle_edge,
                                        size_t base_resolution,
                                        size_t levels,
                                        struct PshapeMesh **out);

/**
 * Reads an ASCII MSH 2.2 file with physical tags 1..4 for inflow,
 * outflow, wall and obstacle.
 *
 * # Safety
 * `path` must be NUL-terminated and `out` a valid pointer.
 */
enum PshapeStatus pshape_mesh_read_msh(const char *path, struct PshapeMesh **out);

/**
 * # Safety
 * `mesh` must come from this library or be NULL.
 */
size_t pshape_mesh_node_count(const struct PshapeMesh *mesh);

/**
 * # Safety
 * `mesh` must come from this library or be NULL.
 */
size_t pshape_mesh_triangle_count(const struct PshapeMesh *mesh);

/**
 * Copies node coordinates `x0 y0 x1 y1 ...` into `buffer` of `len` doubles.
 *
 * # Safety
 * `buffer` must point to `len` writable doubles.
 */
enum PshapeStatus pshape_mesh_nodes(const struct PshapeMesh *mesh, double *buffer, size_t len);

/**
 * # Safety
 * `mesh` must come from this library or be NULL; it must not be used
 * afterwards.
 */
void pshape_mesh_free(struct PshapeMesh *mesh);

/**
 * Solves the channel flow with viscosity `nu` and inflow height
 * `inflow_height`; stores the energy dissipation in `objective` and, when
 * `gradient` is not NULL, its shape gradient (`2 * nodes` doubles).
 *
 * # Safety
 * `objective` must be valid; `gradient` must be NULL or point to `len`
 * writable doubles.
 */
enum PshapeStatus pshape_flow_evaluate(const struct PshapeMesh *mesh,
                                       double nu,
                                       double inflow_height,
                                       double *objective,
                                       double *gradient,
                                       size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSHAPE_H */
