// Copyright 2026 The dacsmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/*
 * C interface to the dacsmc engine and experiment harness.
 *
 * Objects are opaque handles released with their *_free function. Every
 * function that can fail returns a dacsmc_status; on failure the message of
 * the last error on the calling thread is available from dacsmc_last_error().
 * Structured arguments (model parameters, run options, experiment configs)
 * are passed as JSON text.
 */
#ifndef DACSMC_H
#define DACSMC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DACSMC_API __declspec(dllexport)
#else
#define DACSMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dacsmc_status {
  DACSMC_OK = 0,
  DACSMC_INVALID_ARGUMENT,
  DACSMC_MULTIPLE_ROOTS,
  DACSMC_CYCLE_DETECTED,
  DACSMC_DANGLING_PARENT,
  DACSMC_INVALID_NODE,
  DACSMC_MISSING_SPACE,
  DACSMC_SAMPLER_FAILURE,
  DACSMC_NON_FINITE_WEIGHT,
  DACSMC_ZERO_NORMALIZER,
  DACSMC_ALL_ZERO_WEIGHTS,
  DACSMC_MATERIALIZATION_CAP_EXCEEDED,
  DACSMC_EMPTY_INDEX_SET,
  DACSMC_BUDGET_TOO_SMALL,
  DACSMC_STRATEGY_INCOMPATIBLE,
  DACSMC_TOO_LARGE,
  DACSMC_INVALID_COUNTS,
  DACSMC_INVALID_DATA,
  DACSMC_NO_ORACLE,
  DACSMC_DEGENERATE_FIT,
  DACSMC_INSUFFICIENT_ROWS,
  DACSMC_INVALID_CONFIG,
  DACSMC_IO,
  /* An unexpected C++ exception; see dacsmc_last_error(). */
  DACSMC_INTERNAL = 100
} dacsmc_status;

typedef struct dacsmc_model dacsmc_model;
typedef struct dacsmc_cloud dacsmc_cloud;
typedef struct dacsmc_report dacsmc_report;

DACSMC_API const char* dacsmc_version(void);
/* Static string such as "BudgetTooSmall". */
DACSMC_API const char* dacsmc_status_name(dacsmc_status status);
/* Message of the last failure on this thread; empty after a success. */
DACSMC_API const char* dacsmc_last_error(void);

/* ---- models ------------------------------------------------------------- */

/* model_id: "discrete_toy", "gaussian_tree", "schools" or "timevarying". params_json may be NULL. */
DACSMC_API dacsmc_status dacsmc_model_create(const char* model_id, const char* params_json, dacsmc_model** out);
DACSMC_API void dacsmc_model_free(dacsmc_model* model);
DACSMC_API dacsmc_status dacsmc_model_node_count(const dacsmc_model* model, size_t* out);
DACSMC_API dacsmc_status dacsmc_model_root(const dacsmc_model* model, uint32_t* out);
/* Width of a flat path over the subtree of node. */
DACSMC_API dacsmc_status dacsmc_model_path_width(const dacsmc_model* model, uint32_t node, size_t* out);
DACSMC_API dacsmc_status dacsmc_model_test_count(const dacsmc_model* model, size_t* out);
/* Exact log Z at node; DACSMC_NO_ORACLE when the model has none. */
DACSMC_API dacsmc_status dacsmc_model_oracle_log_z(const dacsmc_model* model, uint32_t node, double* out);

/* ---- runs --------------------------------------------------------------- */

/*
 * Runs the engine at node. options_json keys (all optional): n, seed,
 * replicate, strategy, node_strategy, node_n (array over all nodes),
 * ess_threshold (adaptive when present), parallel_children,
 * materialization_cap, baseline ("none" or "asmc"; asmc runs on the root).
 * The cloud refers to the model: free it before the model.
 */
DACSMC_API dacsmc_status dacsmc_run(const dacsmc_model* model, uint32_t node, const char* options_json,
                                    dacsmc_cloud** out);
DACSMC_API void dacsmc_cloud_free(dacsmc_cloud* cloud);
DACSMC_API dacsmc_status dacsmc_cloud_size(const dacsmc_cloud* cloud, size_t* n, size_t* width);
DACSMC_API dacsmc_status dacsmc_cloud_log_mass(const dacsmc_cloud* cloud, double* out);
/* Copies the row-major paths into buffer, which holds at least n * width doubles. */
DACSMC_API dacsmc_status dacsmc_cloud_paths(const dacsmc_cloud* cloud, double* buffer, size_t capacity);
/*
 * Target estimates at the cloud's node: log Z and one mu per test function of
 * that node, in model order. mu may be NULL when mu_capacity is 0.
 */
DACSMC_API dacsmc_status dacsmc_cloud_estimates(const dacsmc_cloud* cloud, double* log_z, double* mu,
                                                size_t mu_capacity, size_t* mu_count);
/* format: "binary" or "csv". */
DACSMC_API dacsmc_status dacsmc_cloud_save(const dacsmc_cloud* cloud, const char* path, const char* format);

/* ---- experiments -------------------------------------------------------- */

DACSMC_API dacsmc_status dacsmc_experiment_run(const char* config_json, dacsmc_report** out);
DACSMC_API void dacsmc_report_free(dacsmc_report* report);
/* 1 when every row succeeded, else 0. */
DACSMC_API int dacsmc_report_all_succeeded(const dacsmc_report* report);
/*
 * Serializations. kind: "rows_csv", "aggregates_json" or "report_json".
 * Writes at most capacity bytes including the terminator and sets *needed to
 * the full size including the terminator; call with capacity 0 to query.
 */
DACSMC_API dacsmc_status dacsmc_report_text(const dacsmc_report* report, const char* kind, char* buffer,
                                            size_t capacity, size_t* needed);
DACSMC_API dacsmc_status dacsmc_report_save(const dacsmc_report* report, const char* kind, const char* path);

/* ---- statistics --------------------------------------------------------- */

DACSMC_API dacsmc_status dacsmc_slope_fit(const double* x, const double* y, size_t count, double* slope,
                                          double* stderr_slope);

#ifdef __cplusplus
}
#endif

#endif /* DACSMC_H */
