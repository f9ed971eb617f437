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

/* Exercises the C interface from C. Exits non-zero on the first failed check. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "dacsmc/dacsmc.h"

static int failures = 0;

#define CHECK(cond)                                               \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: check failed: %s (last error: %s)\n", \
              __FILE__, __LINE__, #cond, dacsmc_last_error());    \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static void test_models_and_runs(void) {
  dacsmc_model* model = NULL;
  CHECK(dacsmc_model_create("gaussian_tree", "{\"depth\": 1}", &model) == DACSMC_OK);
  size_t nodes = 0;
  uint32_t root = 99;
  size_t width = 0;
  CHECK(dacsmc_model_node_count(model, &nodes) == DACSMC_OK && nodes == 3);
  CHECK(dacsmc_model_root(model, &root) == DACSMC_OK && root == 0);
  CHECK(dacsmc_model_path_width(model, 0, &width) == DACSMC_OK && width == 3);
  double oracle = 0.0;
  CHECK(dacsmc_model_oracle_log_z(model, 0, &oracle) == DACSMC_OK);
  CHECK(fabs(oracle - 1.5 * log(2.0 * 3.14159265358979323846)) < 1e-12);

  dacsmc_cloud* cloud = NULL;
  CHECK(dacsmc_run(model, 0, "{\"n\": 32, \"seed\": 4}", &cloud) == DACSMC_OK);
  size_t n = 0;
  CHECK(dacsmc_cloud_size(cloud, &n, &width) == DACSMC_OK && n == 32 && width == 3);
  double* paths = malloc(n * width * sizeof *paths);
  CHECK(dacsmc_cloud_paths(cloud, paths, n * width) == DACSMC_OK);
  CHECK(dacsmc_cloud_paths(cloud, paths, 3) == DACSMC_INVALID_ARGUMENT);
  free(paths);
  double log_z = 0.0;
  double mu[4];
  size_t mu_count = 0;
  CHECK(dacsmc_cloud_estimates(cloud, &log_z, mu, 4, &mu_count) == DACSMC_OK);
  /* matched configuration: the estimate is exact */
  CHECK(fabs(log_z - oracle) < 1e-10);
  CHECK(mu_count == 1 && mu[0] >= 0.0 && mu[0] <= 1.0);
  dacsmc_cloud_free(cloud);

  CHECK(dacsmc_run(model, 0, "{\"n\": 16, \"baseline\": \"asmc\"}", &cloud) == DACSMC_OK);
  CHECK(dacsmc_cloud_estimates(cloud, &log_z, NULL, 0, &mu_count) == DACSMC_OK);
  CHECK(fabs(log_z - oracle) < 1e-10);
  dacsmc_cloud_free(cloud);

  cloud = NULL;
  CHECK(dacsmc_run(model, 0, "{\"n\": 16, \"strategy\": \"mixture\", \"bogus\": 1}", &cloud) == DACSMC_INVALID_CONFIG);
  CHECK(cloud == NULL);
  CHECK(strlen(dacsmc_last_error()) > 0);
  CHECK(dacsmc_run(model, 7, "{}", &cloud) == DACSMC_INVALID_NODE);
  dacsmc_model_free(model);

  CHECK(dacsmc_model_create("discrete_toy", NULL, &model) == DACSMC_OK);
  CHECK(dacsmc_run(model, 0, "{\"n\": 8, \"strategy\": \"factorized\"}", &cloud) == DACSMC_STRATEGY_INCOMPATIBLE);
  dacsmc_model_free(model);

  CHECK(dacsmc_model_create("nope", NULL, &model) == DACSMC_INVALID_CONFIG);
  CHECK(dacsmc_model_create("discrete_toy", "{\"depth\": 9, \"branching\": 3}", &model) == DACSMC_TOO_LARGE);
  CHECK(dacsmc_model_create("discrete_toy", "{not json", &model) == DACSMC_INVALID_CONFIG);
  CHECK(dacsmc_model_node_count(NULL, &nodes) == DACSMC_INVALID_ARGUMENT);
}

static void test_experiments(void) {
  const char* config =
      "{\"model\": \"discrete_toy\", \"params\": {\"uniform\": true}, \"n\": [4, 8], \"replicates\": 5}";
  dacsmc_report* report = NULL;
  CHECK(dacsmc_experiment_run(config, &report) == DACSMC_OK);
  CHECK(dacsmc_report_all_succeeded(report) == 1);
  size_t needed = 0;
  CHECK(dacsmc_report_text(report, "rows_csv", NULL, 0, &needed) == DACSMC_OK);
  char* text = malloc(needed);
  CHECK(dacsmc_report_text(report, "rows_csv", text, needed, &needed) == DACSMC_OK);
  CHECK(strncmp(text, "# dacsmc rows schema=1", 22) == 0);
  CHECK(strlen(text) + 1 == needed);
  free(text);
  char small[8];
  CHECK(dacsmc_report_text(report, "aggregates_json", small, sizeof small, &needed) == DACSMC_OK);
  CHECK(strlen(small) == 7);
  CHECK(dacsmc_report_text(report, "xml", small, sizeof small, &needed) == DACSMC_INVALID_ARGUMENT);
  dacsmc_report_free(report);

  CHECK(dacsmc_experiment_run("{\"replicates\": 1}", &report) == DACSMC_INVALID_CONFIG);
  CHECK(dacsmc_experiment_run("[", &report) == DACSMC_INVALID_CONFIG);
}

static void test_misc(void) {
  const double x[] = {1.0, 2.0, 3.0, 4.0};
  const double y[] = {3.0, 1.0, -1.0, -3.0};
  double slope = 0.0;
  double se = 1.0;
  CHECK(dacsmc_slope_fit(x, y, 4, &slope, &se) == DACSMC_OK);
  CHECK(fabs(slope + 2.0) < 1e-12 && se < 1e-12);
  CHECK(dacsmc_slope_fit(x, y, 2, &slope, &se) == DACSMC_DEGENERATE_FIT);
  CHECK(strcmp(dacsmc_status_name(DACSMC_BUDGET_TOO_SMALL), "BudgetTooSmall") == 0);
  CHECK(strcmp(dacsmc_status_name(DACSMC_OK), "Ok") == 0);
  CHECK(strlen(dacsmc_version()) > 0);
}

int main(void) {
  test_models_and_runs();
  test_experiments();
  test_misc();
  if (failures != 0) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("c api: all checks passed\n");
  return 0;
}
