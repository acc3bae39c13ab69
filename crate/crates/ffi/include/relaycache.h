#ifndef RELAYCACHE_H
#define RELAYCACHE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcStatus {
  RC_STATUS_OK = 0,
  RC_STATUS_NULL_POINTER = 1,
  RC_STATUS_INVALID_ARGUMENT = 2,
  RC_STATUS_IO = 3,
  RC_STATUS_PARSE = 4,
  RC_STATUS_INFEASIBLE = 5,
  RC_STATUS_SOLVER = 6,
  RC_STATUS_UNSUPPORTED = 7,
  RC_STATUS_BUFFER_TOO_SMALL = 8,
  RC_STATUS_DECODE_FAILED = 9,
  RC_STATUS_PANIC = 10,
} RcStatus;

typedef enum RcBaseline {
  RC_BASELINE_MDS = 0,
  RC_BASELINE_MGL = 1,
} RcBaseline;

/**
 * Opaque topology handle.
 */
typedef struct RcTopology RcTopology;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or null.
 */
const char *rc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rc_version(void);

/**
 * Random topology: each of `num_users` users picks `degree` of `num_relays`
 * relays uniformly without replacement.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum RcStatus rc_topology_random(size_t num_relays,
                                 size_t num_users,
                                 size_t degree,
                                 uint64_t seed,
                                 struct RcTopology **out);

/**
 * Combination network: one user per `degree`-subset of the relays.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum RcStatus rc_topology_combination(size_t num_relays, size_t degree, struct RcTopology **out);

/**
 * Builds a topology from a flat list: user `k` connects to the 0-based
 * relays `relays[offsets[k]..offsets[k + 1]]`; `offsets` has
 * `num_users + 1` entries.
 *
 * # Safety
 * `offsets` must point to `num_users + 1` values and `relays` to
 * `offsets[num_users]` values.
 */
enum RcStatus rc_topology_from_lists(size_t num_relays,
                                     size_t num_users,
                                     const size_t *offsets,
                                     const size_t *relays,
                                     struct RcTopology **out);

/**
 * Reads a topology JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RcStatus rc_topology_load(const char *path, struct RcTopology **out);

/**
 * Writes a topology JSON file.
 *
 * # Safety
 * `topology` must come from this library; `path` must be NUL-terminated.
 */
enum RcStatus rc_topology_save(const struct RcTopology *topology, const char *path);

/**
 * Sets the fronthaul and edge link capacities.
 *
 * # Safety
 * `topology` must be a live handle from this library.
 */
enum RcStatus rc_topology_set_capacities(struct RcTopology *topology,
                                         double fronthaul,
                                         double edge);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `topology` must be null or a handle not yet freed.
 */
void rc_topology_free(struct RcTopology *topology);

/**
 * # Safety
 * `topology` must be null or a live handle.
 */
size_t rc_topology_num_relays(const struct RcTopology *topology);

/**
 * # Safety
 * `topology` must be null or a live handle.
 */
size_t rc_topology_num_users(const struct RcTopology *topology);

/**
 * Number of relays serving 0-based `user`, or 0 when out of range.
 *
 * # Safety
 * `topology` must be null or a live handle.
 */
size_t rc_topology_user_degree(const struct RcTopology *topology, size_t user);

/**
 * Minimum max-link load in message units for replication `t`. Per-relay
 * loads are copied into `loads` (capacity `loads_len`) unless it is null.
 *
 * # Safety
 * Pointers must be valid; `loads` must hold `loads_len` doubles.
 */
enum RcStatus rc_solve_maxlink(const struct RcTopology *topology,
                               size_t replication,
                               double *out_objective,
                               double *loads,
                               size_t loads_len);

/**
 * Minimum delivery time in channel uses for files of `file_bits` bits,
 * using the handle's link capacities.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RcStatus rc_solve_delivery_time(const struct RcTopology *topology,
                                     size_t replication,
                                     uint64_t file_bits,
                                     double *out_time);

/**
 * Grouped sequential approximation with `num_groups` groups.
 *
 * # Safety
 * Pointers must be valid; `loads` must hold `loads_len` doubles.
 */
enum RcStatus rc_solve_dynamic(const struct RcTopology *topology,
                               size_t replication,
                               size_t num_groups,
                               uint64_t seed,
                               double *out_objective,
                               double *loads,
                               size_t loads_len);

/**
 * Max-link load of a fixed baseline allocation; requires every user to
 * have exactly `degree` relays.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RcStatus rc_baseline_maxlink(const struct RcTopology *topology,
                                  enum RcBaseline scheme,
                                  size_t degree,
                                  size_t replication,
                                  double *out_objective);

/**
 * Delivers random files of `file_bytes` bytes over the LP allocation with
 * `packets` coded packets per message and checks every user's file.
 * Returns `RC_STATUS_DECODE_FAILED` if any user could not decode.
 *
 * # Safety
 * Pointers must be valid; `out_resamples` may be null.
 */
enum RcStatus rc_verify(const struct RcTopology *topology,
                        size_t replication,
                        size_t packets,
                        size_t file_bytes,
                        uint64_t seed,
                        size_t *out_resamples);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELAYCACHE_H */
