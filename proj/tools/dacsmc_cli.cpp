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

// Command-line front end: builds an experiment config from a JSON file and
// flags, runs it through the C interface and writes rows or a full report.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dacsmc/dacsmc.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitFailedCells = 1;
constexpr int kExitUsage = 2;

std::string text_of(const dacsmc_report* report, const char* kind) {
  size_t needed = 0;
  if (dacsmc_report_text(report, kind, nullptr, 0, &needed) != DACSMC_OK) {
    return {};
  }
  std::string out(needed, '\0');
  dacsmc_report_text(report, kind, out.data(), out.size(), &needed);
  out.resize(needed - 1);
  return out;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out{path};
  out << text;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Divide-and-conquer SMC experiment runner"};
  std::string config_path;
  std::string model;
  std::vector<std::size_t> ns;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::string strategy;
  double ess_threshold = -1.0;
  std::string baseline;
  std::string out;
  std::string format;
  std::vector<std::string> params;
  std::size_t threads = 0;
  bool trace_nodes = false;
  bool list_models = false;

  app.add_option("--config", config_path, "JSON experiment config; flags override its keys")->check(CLI::ExistingFile);
  app.add_option("--model", model, "discrete_toy, gaussian_tree, schools or timevarying");
  app.add_option("--param", params, "Model parameter KEY=VALUE, VALUE parsed as JSON when possible");
  app.add_option("--n", ns, "Particle counts, comma separated and increasing")->delimiter(',');
  app.add_option("--replicates", replicates, "Replicates per particle count")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Root seed; replicate r uses stream (seed, r)");
  app.add_option("--strategy", strategy, "auto, generic, factorized, mixture, nested, incomplete:BUDGET or incomplete:diag");
  app.add_option("--ess-threshold", ess_threshold, "Adaptive resampling threshold in [0, 1]")->check(CLI::NonNegativeNumber);
  app.add_option("--baseline", baseline, "Paired baseline")->check(CLI::IsMember({"none", "asmc"}));
  app.add_option("--out", out, "Output path; stdout when absent");
  app.add_option("--format", format, "csv (rows) or json (aggregates and rows)")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "Replicate workers, 0 for all cores");
  app.add_flag("--trace-nodes", trace_nodes, "Add per-node log mass and ESS columns");
  app.add_flag("--list-models", list_models, "Print model ids and exit");
  CLI11_PARSE(app, argc, argv);

  if (list_models) {
    std::cout << "discrete_toy\ngaussian_tree\nschools\ntimevarying\n";
    return 0;
  }

  json config = json::object();
  if (!config_path.empty()) {
    std::ifstream in{config_path};
    try {
      in >> config;
    } catch (const json::exception& e) {
      std::cerr << "error: " << config_path << ": " << e.what() << "\n";
      return kExitUsage;
    }
  }
  if (!model.empty()) {
    config["model"] = model;
  }
  for (const std::string& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --param expects KEY=VALUE, got '" << p << "'\n";
      return kExitUsage;
    }
    const std::string value = p.substr(eq + 1);
    json parsed = json::parse(value, nullptr, false);
    config["params"][p.substr(0, eq)] = parsed.is_discarded() ? json(value) : parsed;
  }
  if (!ns.empty()) {
    config["n"] = ns;
  }
  if (replicates > 0) {
    config["replicates"] = replicates;
  }
  if (app.count("--seed") > 0) {
    config["seed"] = seed;
  }
  if (!strategy.empty()) {
    config["strategy"] = strategy;
  }
  if (app.count("--ess-threshold") > 0) {
    config["ess_threshold"] = ess_threshold;
  }
  if (!baseline.empty()) {
    config["baseline"] = baseline;
  }
  if (!out.empty()) {
    config["out"] = out;
  }
  if (!format.empty()) {
    config["format"] = format;
  }
  if (app.count("--threads") > 0) {
    config["threads"] = threads;
  }
  if (trace_nodes) {
    config["trace_nodes"] = true;
  }

  dacsmc_report* report = nullptr;
  const dacsmc_status status = dacsmc_experiment_run(config.dump().c_str(), &report);
  if (status != DACSMC_OK) {
    std::cerr << "error: " << dacsmc_status_name(status) << ": " << dacsmc_last_error() << "\n";
    return kExitUsage;
  }

  const std::string out_path = config.value("out", std::string{});
  const bool as_json = config.value("format", std::string{"csv"}) == "json";
  const std::string body = text_of(report, as_json ? "report_json" : "rows_csv");
  bool written = true;
  if (out_path.empty()) {
    std::cout << body;
  } else {
    written = write_file(out_path, body);
    if (written && !as_json) {
      written = write_file(out_path + ".aggregates.json", text_of(report, "aggregates_json"));
    }
  }
  const bool ok = dacsmc_report_all_succeeded(report) == 1;
  dacsmc_report_free(report);
  if (!written) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return kExitUsage;
  }
  if (!ok) {
    std::cerr << "some cells had failed replicates; see the status column\n";
    return kExitFailedCells;
  }
  return 0;
}
