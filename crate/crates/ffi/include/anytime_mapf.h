#ifndef ANYTIME_MAPF_H
#define ANYTIME_MAPF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum {
  MAPF_STATUS_OK = 0,
  MAPF_STATUS_NULL_POINTER = 1,
  MAPF_STATUS_INVALID_INPUT = 2,
  MAPF_STATUS_PARSE_ERROR = 3,
  MAPF_STATUS_NO_INITIAL_SOLUTION = 4,
  MAPF_STATUS_IO_ERROR = 5,
  MAPF_STATUS_OUT_OF_RANGE = 6,
  MAPF_STATUS_PANIC = 7,
} MapfStatus;

typedef enum {
  MAPF_ALGORITHM_ADDRESS_TS = 0,
  MAPF_ALGORITHM_ADDRESS_EG = 1,
  MAPF_ALGORITHM_LNS_ADAPTIVE = 2,
  MAPF_ALGORITHM_LNS_AGENT_ONLY = 3,
  MAPF_ALGORITHM_LNS_ADAPTIVE_PLUS_ADDRESS = 4,
} MapfAlgorithm;

typedef enum {
  MAPF_CLOCK_WALL = 0,
  MAPF_CLOCK_WORK = 1,
} MapfClock;

/**
 * Opaque problem instance.
 */
typedef struct MapfInstance MapfInstance;

/**
 * Opaque solver outcome.
 */
typedef struct MapfResult MapfResult;

/**
 * Solver settings; obtain defaults from `mapf_config_default`.
 */
typedef struct {
  MapfAlgorithm algorithm;
  size_t neighborhood_size;
  size_t k;
  double epsilon;
  double time_budget_s;
  uint64_t seed;
  MapfClock clock;
  double work_unit_s;
} MapfConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Writes the library defaults (ADDRESS-TS, N = 8, K = 32, ε = 0.5,
 * 15 s wall-clock budget, seed 0) into `out`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `MapfConfig`.
 */
MapfStatus mapf_config_default(MapfConfig *out);

/**
 * Builds an instance from Moving-AI map and scenario text, keeping the first
 * `agents` scenario rows.
 *
 * # Safety
 * `map_text` and `scen_text` must be NUL-terminated strings; `out` must be
 * writable. On success `*out` owns a handle for `mapf_instance_free`.
 */
MapfStatus mapf_instance_from_text(const char *map_text,
                                   const char *scen_text,
                                   size_t agents,
                                   MapfInstance **out);

/**
 * Loads an instance from `.map` and `.scen` files.
 *
 * # Safety
 * Same contract as `mapf_instance_from_text`, with paths instead of text.
 */
MapfStatus mapf_instance_from_files(const char *map_path,
                                    const char *scen_path,
                                    size_t agents,
                                    MapfInstance **out);

/**
 * Number of agents, or 0 for a null handle.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
size_t mapf_instance_num_agents(const MapfInstance *instance);

/**
 * # Safety
 * `instance` must be null or a handle not yet freed.
 */
void mapf_instance_free(MapfInstance *instance);

/**
 * Runs the configured solver.
 *
 * # Safety
 * `instance` must be a live handle, `config` readable, `out` writable. On
 * success `*out` owns a handle for `mapf_result_free`.
 */
MapfStatus mapf_solve(const MapfInstance *instance, const MapfConfig *config, MapfResult **out);

/**
 * Sum of delays of the returned plan, or `SIZE_MAX` for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t mapf_result_final_cost(const MapfResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t mapf_result_initial_cost(const MapfResult *result);

/**
 * Area under the best-cost curve up to the budget, or NaN for null.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double mapf_result_auc(const MapfResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
uint64_t mapf_result_iterations(const MapfResult *result);

/**
 * Number of trace rows, including the closing row.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t mapf_result_trace_len(const MapfResult *result);

/**
 * Reads trace row `index`.
 *
 * # Safety
 * `result` must be a live handle; `time_s` and `cost` must be writable.
 */
MapfStatus mapf_result_trace_entry(const MapfResult *result,
                                   size_t index,
                                   double *time_s,
                                   size_t *cost);

/**
 * Number of cells in `agent`'s path (steps + 1), or 0 if out of range.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t mapf_result_path_len(const MapfResult *result, size_t agent);

/**
 * Writes the column `x` and row `y` of `agent` at time `t`; positions after
 * the path ends are the goal.
 *
 * # Safety
 * `result` must be a live handle; `x` and `y` must be writable.
 */
MapfStatus mapf_result_position(const MapfResult *result,
                                size_t agent,
                                size_t t,
                                size_t *x,
                                size_t *y);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void mapf_result_free(MapfResult *result);

/**
 * Message of the calling thread's most recent failure, or null if none.
 */
const char *mapf_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANYTIME_MAPF_H */
