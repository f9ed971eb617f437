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

#include "dacsmc/dacsmc.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "dacsmc/cloud_io.hpp"
#include "dacsmc/engine.hpp"
#include "dacsmc/error.hpp"
#include "dacsmc/harness.hpp"
#include "dacsmc/models.hpp"
#include "dacsmc/stats.hpp"

struct dacsmc_model {
  dacsmc::ModelSpec spec;
};

struct dacsmc_cloud {
  dacsmc::ParticleCloud cloud;
  /// The model whose target weights and tests apply (the lumped one for baseline runs).
  std::shared_ptr<const dacsmc::ModelSpec> model;
};

struct dacsmc_report {
  dacsmc::EstimateReport report;
};

namespace {

thread_local std::string g_last_error;

dacsmc_status from_code(dacsmc::ErrorCode code) {
  // The enums share their order.
  return static_cast<dacsmc_status>(static_cast<int>(code) + 1);
}

template <typename F>
dacsmc_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return DACSMC_OK;
  } catch (const dacsmc::Error& e) {
    g_last_error = e.what();
    return from_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string{"malformed JSON: "} + e.what();
    return DACSMC_INVALID_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DACSMC_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return DACSMC_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  dacsmc::require(p != nullptr, dacsmc::ErrorCode::kInvalidArgument, std::string{what} + " is null");
}

nlohmann::json parse_json(const char* text) {
  if (text == nullptr || *text == '\0') {
    return nlohmann::json::object();
  }
  return nlohmann::json::parse(text);
}

std::string report_text(const dacsmc::EstimateReport& r, const char* kind) {
  need(kind, "kind");
  const std::string k{kind};
  if (k == "rows_csv") {
    std::ostringstream out;
    dacsmc::write_rows_csv(r, out);
    return out.str();
  }
  if (k == "aggregates_json") {
    return dacsmc::aggregates_json(r).dump(2) + "\n";
  }
  if (k == "report_json") {
    return dacsmc::report_json(r).dump(2) + "\n";
  }
  throw dacsmc::Error{dacsmc::ErrorCode::kInvalidArgument, "unknown report kind '" + k + "'"};
}

}  // namespace

static_assert(DACSMC_IO == static_cast<int>(dacsmc::ErrorCode::kIo) + 1, "status codes out of sync with ErrorCode");

extern "C" {

const char* dacsmc_version(void) { return "0.1.0"; }

const char* dacsmc_status_name(dacsmc_status status) {
  if (status == DACSMC_OK) {
    return "Ok";
  }
  if (status == DACSMC_INTERNAL) {
    return "Internal";
  }
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(dacsmc::ErrorCode::kIo)) {
    return "Unknown";
  }
  // to_string returns views of string literals, so data() is terminated.
  return dacsmc::to_string(static_cast<dacsmc::ErrorCode>(code)).data();
}

const char* dacsmc_last_error(void) { return g_last_error.c_str(); }

dacsmc_status dacsmc_model_create(const char* model_id, const char* params_json, dacsmc_model** out) {
  return guarded([&] {
    need(model_id, "model_id");
    need(out, "out");
    *out = nullptr;
    *out = new dacsmc_model{dacsmc::build_model(model_id, parse_json(params_json))};
  });
}

void dacsmc_model_free(dacsmc_model* model) { delete model; }

dacsmc_status dacsmc_model_node_count(const dacsmc_model* model, size_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = model->spec.tree().size();
  });
}

dacsmc_status dacsmc_model_root(const dacsmc_model* model, uint32_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = model->spec.tree().root();
  });
}

dacsmc_status dacsmc_model_path_width(const dacsmc_model* model, uint32_t node, size_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = model->spec.layout(node).total_width();
  });
}

dacsmc_status dacsmc_model_test_count(const dacsmc_model* model, size_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = model->spec.test_functions.size();
  });
}

dacsmc_status dacsmc_model_oracle_log_z(const dacsmc_model* model, uint32_t node, double* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = dacsmc::oracle_eval(model->spec, node, {}).log_z;
  });
}

dacsmc_status dacsmc_run(const dacsmc_model* model, uint32_t node, const char* options_json, dacsmc_cloud** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = nullptr;
    const auto j = parse_json(options_json);
    for (const auto& [key, value] : j.items()) {
      static const char* const kKeys[] = {"n",           "seed",     "replicate",      "strategy",
                                          "node_strategy", "node_n", "ess_threshold", "parallel_children",
                                          "materialization_cap", "baseline"};
      bool known = false;
      for (const char* k : kKeys) {
        known = known || key == k;
      }
      dacsmc::require(known, dacsmc::ErrorCode::kInvalidConfig, "unknown run option '" + key + "'");
    }
    dacsmc::EngineOptions opts;
    opts.n = j.value("n", opts.n);
    opts.seed = j.value("seed", opts.seed);
    opts.replicate = j.value("replicate", opts.replicate);
    if (j.contains("strategy")) {
      opts.strategy = dacsmc::Strategy::parse(j.at("strategy").get<std::string>());
    }
    if (j.contains("node_strategy")) {
      for (const auto& [key, value] : j.at("node_strategy").items()) {
        opts.node_strategy[static_cast<dacsmc::NodeId>(std::stoul(key))] =
            dacsmc::Strategy::parse(value.get<std::string>());
      }
    }
    if (j.contains("node_n")) {
      opts.node_n = j.at("node_n").get<std::vector<std::size_t>>();
    }
    opts.parallel_children = j.value("parallel_children", false);
    opts.materialization_cap = j.value("materialization_cap", opts.materialization_cap);
    const std::string baseline = j.value("baseline", std::string{"none"});
    dacsmc::require(baseline == "none" || baseline == "asmc", dacsmc::ErrorCode::kInvalidConfig,
                    "baseline must be 'none' or 'asmc'");
    const bool adaptive = j.contains("ess_threshold") && !j.at("ess_threshold").is_null();
    if (adaptive) {
      opts.ess_threshold = j.at("ess_threshold").get<double>();
    }
    std::shared_ptr<const dacsmc::ModelSpec> target;
    if (baseline == "asmc") {
      dacsmc::require(node == model->spec.tree().root(), dacsmc::ErrorCode::kInvalidArgument,
                      "the baseline runs on the root only");
      target = std::make_shared<const dacsmc::ModelSpec>(dacsmc::lumped_model(model->spec));
      opts.strategy = dacsmc::Strategy{dacsmc::Strategy::Kind::kGeneric};
      opts.node_strategy.clear();
      opts.node_n.clear();
      node = target->tree().root();
    } else {
      // Aliasing pointer: the handle must outlive its clouds, as documented for the model.
      target = std::shared_ptr<const dacsmc::ModelSpec>(std::shared_ptr<const dacsmc::ModelSpec>{}, &model->spec);
    }
    dacsmc::ParticleCloud cloud =
        adaptive ? dacsmc::dac_smc_adaptive(*target, node, opts) : dacsmc::dac_smc(*target, node, opts);
    *out = new dacsmc_cloud{std::move(cloud), std::move(target)};
  });
}

void dacsmc_cloud_free(dacsmc_cloud* cloud) { delete cloud; }

dacsmc_status dacsmc_cloud_size(const dacsmc_cloud* cloud, size_t* n, size_t* width) {
  return guarded([&] {
    need(cloud, "cloud");
    if (n != nullptr) {
      *n = cloud->cloud.size();
    }
    if (width != nullptr) {
      *width = cloud->cloud.width();
    }
  });
}

dacsmc_status dacsmc_cloud_log_mass(const dacsmc_cloud* cloud, double* out) {
  return guarded([&] {
    need(cloud, "cloud");
    need(out, "out");
    *out = cloud->cloud.log_mass();
  });
}

dacsmc_status dacsmc_cloud_paths(const dacsmc_cloud* cloud, double* buffer, size_t capacity) {
  return guarded([&] {
    need(cloud, "cloud");
    need(buffer, "buffer");
    const auto data = cloud->cloud.paths().data();
    dacsmc::require(capacity >= data.size(), dacsmc::ErrorCode::kInvalidArgument,
                    "buffer holds " + std::to_string(capacity) + " values, need " + std::to_string(data.size()));
    std::memcpy(buffer, data.data(), data.size_bytes());
  });
}

dacsmc_status dacsmc_cloud_estimates(const dacsmc_cloud* cloud, double* log_z, double* mu, size_t mu_capacity,
                                     size_t* mu_count) {
  return guarded([&] {
    need(cloud, "cloud");
    std::vector<dacsmc::TestFunction> tests;
    for (const auto& f : cloud->model->test_functions) {
      if (f.node == cloud->cloud.node()) {
        tests.push_back(f);
      }
    }
    const auto est = dacsmc::target_estimates(cloud->cloud, *cloud->model, tests);
    if (log_z != nullptr) {
      *log_z = est.log_z;
    }
    if (mu_count != nullptr) {
      *mu_count = est.mu.size();
    }
    dacsmc::require(mu_capacity == 0 || mu != nullptr, dacsmc::ErrorCode::kInvalidArgument, "mu is null");
    for (std::size_t k = 0; k < est.mu.size() && k < mu_capacity; ++k) {
      mu[k] = est.mu[k];
    }
  });
}

dacsmc_status dacsmc_cloud_save(const dacsmc_cloud* cloud, const char* path, const char* format) {
  return guarded([&] {
    need(cloud, "cloud");
    need(path, "path");
    const std::string f = format == nullptr ? "binary" : format;
    dacsmc::require(f == "binary" || f == "csv", dacsmc::ErrorCode::kInvalidArgument,
                    "cloud format must be 'binary' or 'csv'");
    std::ofstream out{path, f == "binary" ? std::ios::binary : std::ios::out};
    dacsmc::require(out.good(), dacsmc::ErrorCode::kIo, std::string{"cannot open '"} + path + "'");
    if (f == "binary") {
      dacsmc::write_cloud_binary(cloud->cloud, out);
    } else {
      dacsmc::write_cloud_csv(cloud->cloud, out);
    }
  });
}

dacsmc_status dacsmc_experiment_run(const char* config_json, dacsmc_report** out) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out, "out");
    *out = nullptr;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw dacsmc::Error{dacsmc::ErrorCode::kInvalidConfig, std::string{"malformed config JSON: "} + e.what()};
    }
    *out = new dacsmc_report{dacsmc::run_experiment(dacsmc::ExperimentConfig::from_json(j))};
  });
}

void dacsmc_report_free(dacsmc_report* report) { delete report; }

int dacsmc_report_all_succeeded(const dacsmc_report* report) {
  return report != nullptr && report->report.all_succeeded() ? 1 : 0;
}

dacsmc_status dacsmc_report_text(const dacsmc_report* report, const char* kind, char* buffer, size_t capacity,
                                 size_t* needed) {
  return guarded([&] {
    need(report, "report");
    const std::string text = report_text(report->report, kind);
    if (needed != nullptr) {
      *needed = text.size() + 1;
    }
    if (capacity > 0) {
      need(buffer, "buffer");
      const std::size_t n = std::min(capacity - 1, text.size());
      std::memcpy(buffer, text.data(), n);
      buffer[n] = '\0';
    }
  });
}

dacsmc_status dacsmc_report_save(const dacsmc_report* report, const char* kind, const char* path) {
  return guarded([&] {
    need(report, "report");
    need(path, "path");
    const std::string text = report_text(report->report, kind);
    std::ofstream out{path};
    dacsmc::require(out.good(), dacsmc::ErrorCode::kIo, std::string{"cannot open '"} + path + "'");
    out << text;
    dacsmc::require(out.good(), dacsmc::ErrorCode::kIo, std::string{"failed writing '"} + path + "'");
  });
}

dacsmc_status dacsmc_slope_fit(const double* x, const double* y, size_t count, double* slope, double* stderr_slope) {
  return guarded([&] {
    dacsmc::require(count == 0 || (x != nullptr && y != nullptr), dacsmc::ErrorCode::kInvalidArgument,
                    "x and y must not be null");
    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < count; ++i) {
      points.emplace_back(x[i], y[i]);
    }
    const auto fit = dacsmc::slope_fit(points);
    if (slope != nullptr) {
      *slope = fit.slope;
    }
    if (stderr_slope != nullptr) {
      *stderr_slope = fit.stderr_slope;
    }
  });
}

}  // extern "C"
