#ifndef CHBS_H
#define CHBS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ChbsGraphKind {
  CHBS_GRAPH_KIND_POLYNOMIAL = 0,
  CHBS_GRAPH_KIND_LOGARITHMIC = 1,
  CHBS_GRAPH_KIND_OBSTACLE = 2,
} ChbsGraphKind;

typedef enum ChbsStatus {
  CHBS_STATUS_OK = 0,
  CHBS_STATUS_NULL_POINTER = 1,
  CHBS_STATUS_INVALID_ARGUMENT = 2,
  CHBS_STATUS_DOMAIN = 3,
  CHBS_STATUS_NUMERICAL = 4,
  CHBS_STATUS_COMPATIBILITY = 5,
  CHBS_STATUS_CONFIG = 6,
  CHBS_STATUS_IO = 7,
  CHBS_STATUS_STEP_FAILED = 8,
  CHBS_STATUS_BUFFER_TOO_SMALL = 9,
  CHBS_STATUS_PANIC = 10,
} ChbsStatus;

// A trajectory together with its mesh, scheme and forcing.
typedef struct ChbsSimulation ChbsSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Reads a TOML run configuration from `path` and initializes a simulation.
// Relative paths inside the file resolve against its directory.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum ChbsStatus chbs_simulation_from_file(const char *path, struct ChbsSimulation **out);

// Like [`chbs_simulation_from_file`] with the configuration given as text;
// relative paths resolve against the working directory.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum ChbsStatus chbs_simulation_from_str(const char *text, struct ChbsSimulation **out);

// # Safety
// `sim` must come from a constructor of this library and not be used afterwards.
void chbs_simulation_free(struct ChbsSimulation *sim);

// Advances one step. `*finished` is set to 1 once `t_end` has been reached
// (in which case no step is taken), else 0.
//
// # Safety
// `sim` must be a live handle and `finished` a valid pointer.
enum ChbsStatus chbs_simulation_step(struct ChbsSimulation *sim, int32_t *finished);

// Steps until `t_end`.
//
// # Safety
// `sim` must be a live handle.
enum ChbsStatus chbs_simulation_run(struct ChbsSimulation *sim);

// # Safety
// `sim` must be a live handle and `out` a valid pointer.
enum ChbsStatus chbs_simulation_time(const struct ChbsSimulation *sim, double *out);

// Number of mesh nodes, the length expected by the field accessors.
//
// # Safety
// `sim` must be a live handle and `out` a valid pointer.
enum ChbsStatus chbs_simulation_num_nodes(const struct ChbsSimulation *sim, uintptr_t *out);

// Copies the nodal order parameter `u` into `buf`.
//
// # Safety
// `sim` must be a live handle and `buf` valid for `len` writes.
enum ChbsStatus chbs_simulation_copy_u(const struct ChbsSimulation *sim,
                                       double *buf,
                                       uintptr_t len);

// Copies the nodal chemical potential into `buf`.
//
// # Safety
// `sim` must be a live handle and `buf` valid for `len` writes.
enum ChbsStatus chbs_simulation_copy_mu(const struct ChbsSimulation *sim,
                                        double *buf,
                                        uintptr_t len);

// Mean of `u` over bulk and boundary.
//
// # Safety
// `sim` must be a live handle and `out` a valid pointer.
enum ChbsStatus chbs_simulation_mean(const struct ChbsSimulation *sim, double *out);

// # Safety
// `sim` must be a live handle and `out` a valid pointer.
enum ChbsStatus chbs_simulation_energy(const struct ChbsSimulation *sim, double *out);

// Yosida approximation of a prototype graph at `r`.
//
// # Safety
// `out` must be a valid pointer.
enum ChbsStatus chbs_yosida(enum ChbsGraphKind kind, double eps, double r, double *out);

// Poincaré constant of the unit square mesh with `n` nodes per side.
//
// # Safety
// `out` must be a valid pointer.
enum ChbsStatus chbs_poincare_constant(uintptr_t n, double *out);

// Copies the message of the last failed call on this thread into `buf`
// (NUL-terminated, truncated to `len`) and returns the full message length
// excluding the terminator.
//
// # Safety
// `buf` must be valid for `len` writes or null.
uintptr_t chbs_last_error(char *buf, uintptr_t len);

// NUL-terminated library version.
const char *chbs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHBS_H */
