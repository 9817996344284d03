/* C interface for the rexplore repository-exploration engine. */

#ifndef REXPLORE_H
#define REXPLORE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for every fallible entry point.
 */
typedef enum RxStatus {
  RX_STATUS_OK = 0,
  RX_STATUS_NULL_ARGUMENT = 1,
  RX_STATUS_INVALID_UTF8 = 2,
  RX_STATUS_GRAPH_ERROR = 3,
  RX_STATUS_EXPLORE_ERROR = 4,
  RX_STATUS_SEARCH_ERROR = 5,
  RX_STATUS_PANIC = 6,
} RxStatus;

/**
 * Opaque graph handle.
 */
typedef struct RxGraph RxGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * is valid until the next API call on the same thread.
 */
const char *rx_last_error(void);

/**
 * Crate version as a static string; never freed by the caller.
 */
const char *rx_version(void);

/**
 * Parse a source tree into a graph handle.
 *
 * # Safety
 * `root` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum RxStatus rx_graph_build(const char *root, struct RxGraph **out);

/**
 * Load a graph file produced by `rx_graph_save` or the CLI.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum RxStatus rx_graph_load(const char *path, struct RxGraph **out);

/**
 * Write the graph to a file.
 *
 * # Safety
 * `graph` must come from this API; `path` must be valid.
 */
enum RxStatus rx_graph_save(const struct RxGraph *graph, const char *path);

/**
 * Release a graph handle. NULL is a no-op.
 *
 * # Safety
 * `graph` must come from this API and not be used afterwards.
 */
void rx_graph_free(struct RxGraph *graph);

/**
 * Total node count; zero for a NULL handle.
 *
 * # Safety
 * `graph` must be NULL or come from this API.
 */
uint64_t rx_graph_node_count(const struct RxGraph *graph);

/**
 * Function-call edge count; zero for a NULL handle.
 *
 * # Safety
 * `graph` must be NULL or come from this API.
 */
uint64_t rx_graph_call_edge_count(const struct RxGraph *graph);

/**
 * Node and edge counts as a JSON string.
 *
 * # Safety
 * Pointers must satisfy the usual contracts; free the result with
 * `rx_string_free`.
 */
enum RxStatus rx_graph_stats_json(const struct RxGraph *graph, char **out);

/**
 * # Safety
 * Pointers must satisfy the usual contracts; free the result with
 * `rx_string_free`.
 */
enum RxStatus rx_search_class_json(const struct RxGraph *graph, const char *name, char **out);

/**
 * `scope` may be NULL for an unscoped search.
 *
 * # Safety
 * Pointers must satisfy the usual contracts; free the result with
 * `rx_string_free`.
 */
enum RxStatus rx_search_method_json(const struct RxGraph *graph,
                                    const char *name,
                                    const char *scope,
                                    char **out);

/**
 * # Safety
 * Pointers must satisfy the usual contracts; free the result with
 * `rx_string_free`.
 */
enum RxStatus rx_search_code_json(const struct RxGraph *graph, const char *fragment, char **out);

/**
 * Run exploration with the deterministic lexical oracle and return the
 * report as JSON. Pass zero for `max_iterations`, `max_seconds` or
 * `reward_threshold` to keep the defaults (600 / 300 s / 6).
 *
 * # Safety
 * Pointers must satisfy the usual contracts; free the result with
 * `rx_string_free`.
 */
enum RxStatus rx_explore_lexical_json(const struct RxGraph *graph,
                                      const char *issue,
                                      uint64_t max_iterations,
                                      double max_seconds,
                                      uint8_t reward_threshold,
                                      char **out);

/**
 * Free a string returned by this API. NULL is a no-op.
 *
 * # Safety
 * `s` must come from this API and not be used afterwards.
 */
void rx_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REXPLORE_H */
