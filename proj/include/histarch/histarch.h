/* C interface to the histarch core. All strings returned through char** are
   heap-allocated by the library; release them with ha_string_free. */
#ifndef HISTARCH_H
#define HISTARCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HA_API __declspec(dllexport)
#else
#define HA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ha_status {
  HA_OK = 0,
  HA_ERR_PARAMETER = 1,
  HA_ERR_DOMAIN = 2,
  HA_ERR_INPUT = 3,
  HA_ERR_STRUCTURE = 4,
  HA_ERR_NUMERIC = 5,
  HA_ERR_IO = 6,
  HA_ERR_BUDGET = 7,
  HA_ERR_EXHAUSTED = 8,
  HA_ERR_CONFIG = 9,
  HA_ERR_INTERNAL = 10
} ha_status;

/* Message of the last failure on the calling thread, "" if none. */
HA_API const char* ha_last_error(void);
HA_API void ha_string_free(char* s);
HA_API const char* ha_version(void);

/* ---- archive ---- */

typedef struct ha_archive ha_archive;

typedef enum ha_insert_kind { HA_NEW_LEAF = 0, HA_REVISIT = 1, HA_BLOCKED = 2 } ha_insert_kind;

HA_API ha_status ha_archive_create(const double* lower, const double* upper, size_t dim, int lv, int k,
                                   double revisit_eps, ha_archive** out);
HA_API void ha_archive_destroy(ha_archive* a);

/* depth may be NULL */
HA_API ha_status ha_archive_insert(ha_archive* a, const double* x, size_t dim, ha_insert_kind* kind, int* depth);
/* Cell of the leaf containing x (lower/upper hold dim values each). */
HA_API ha_status ha_archive_region(const ha_archive* a, const double* x, size_t dim, double* lower, double* upper);
/* Blocks the leaf containing x. */
HA_API ha_status ha_archive_block_at(ha_archive* a, const double* x, size_t dim);
HA_API ha_status ha_archive_is_blocked(const ha_archive* a, const double* x, size_t dim, int* blocked);
HA_API ha_status ha_archive_prune(ha_archive* a, double fraction, size_t* removed);
HA_API size_t ha_archive_size(const ha_archive* a);
HA_API int ha_archive_max_depth(const ha_archive* a);
HA_API ha_status ha_archive_dump(const ha_archive* a, char** out);

/* ---- benchmarks ---- */

typedef struct ha_suite ha_suite;

/* dim is 2, 10 or 30 */
HA_API ha_status ha_suite_create(size_t dim, uint64_t seed, ha_suite** out);
HA_API void ha_suite_destroy(ha_suite* s);
HA_API size_t ha_suite_size(const ha_suite* s);
HA_API size_t ha_suite_dim(const ha_suite* s);
HA_API const char* ha_suite_name(const ha_suite* s, size_t index);
HA_API ha_status ha_suite_evaluate(const ha_suite* s, size_t index, const double* x, size_t dim, double* f);
HA_API ha_status ha_suite_manifest(const ha_suite* s, char** json_out);

/* ---- parameters ---- */

HA_API int ha_default_lambda(int dim);
HA_API int ha_stagnation_window(int dim, int lambda);
HA_API ha_status ha_derive_depth_params(uint64_t budget, int lambda, int* lv, int* k);

/* ---- runs and experiments ---- */

/* One run of algo ("hr", "cmaes", "cnrga_lru", "cnrga") on suite problem
   `index`; the run record is returned as JSON. */
HA_API ha_status ha_run_algorithm(const ha_suite* s, size_t index, const char* algo, uint64_t budget, uint64_t seed,
                                  int include_trace, char** json_out);

/* Runs the experiment described by config_json and writes the output
   directory named by its "out" key (if any). The summary tables are returned
   as JSON. Warnings about failed runs go to log_out when non-NULL. */
HA_API ha_status ha_experiment_run(const char* config_json, char** summary_out, char** log_out);

/* Rebuilds the tables of a finished experiment directory in place. */
HA_API ha_status ha_experiment_stats(const char* dir, char** summary_out);

/* Kruskal-Wallis over `groups` samples laid out back to back. */
HA_API ha_status ha_kruskal_wallis(const double* values, const size_t* sizes, size_t groups, double* h, double* p);

#ifdef __cplusplus
}
#endif

#endif
