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

#include "dacsmc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "dacsmc/error.hpp"
#include "dacsmc/log_math.hpp"
#include "dacsmc/models.hpp"

#ifndef DACSMC_DEFAULT_SCHOOLS_CSV
#define DACSMC_DEFAULT_SCHOOLS_CSV "data/schools.csv"
#endif

namespace dacsmc {
namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& message) { throw Error{ErrorCode::kInvalidConfig, message}; }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) {
    bad_config(where + " must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      bad_config("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

NodeId node_key(const std::string& text) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(text, &used);
    if (used == text.size()) {
      return static_cast<NodeId>(v);
    }
  } catch (const std::exception&) {
  }
  bad_config("node keys must be non-negative integers, got '" + text + "'");
}

std::string format_double(double x) {
  if (std::isnan(x)) {
    return "nan";
  }
  if (std::isinf(x)) {
    return x > 0 ? "inf" : "-inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") {
    return std::nan("");
  }
  if (s == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (s == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) {
      return v;
    }
  } catch (const std::exception&) {
  }
  throw Error{ErrorCode::kInvalidData, "not a number: '" + s + "'"};
}

/// CSV field with quotes when it needs them.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json summary_json(const Summary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"variance", s.variance}, {"se", s.se}};
}

/// Everything shared by the replicates of one experiment.
struct Setup {
  const ExperimentConfig& config;
  ModelSpec model;
  std::optional<ModelSpec> line;
  std::vector<std::size_t> test_index;
  std::vector<std::string> test_names;
  std::optional<OracleValues> oracle;
};

Setup make_setup(const ExperimentConfig& config) {
  config.validate();
  Setup s{config, build_model(config.model, config.params), std::nullopt, {}, {}, std::nullopt};
  const auto& tests = s.model.test_functions;
  if (config.tests.empty()) {
    for (std::size_t k = 0; k < tests.size(); ++k) {
      s.test_index.push_back(k);
    }
  } else {
    for (const std::string& name : config.tests) {
      const auto it = std::find_if(tests.begin(), tests.end(), [&](const TestFunction& f) { return f.name == name; });
      if (it == tests.end()) {
        bad_config("model '" + s.model.name() + "' has no test function '" + name + "'");
      }
      s.test_index.push_back(static_cast<std::size_t>(it - tests.begin()));
    }
  }
  for (const std::size_t k : s.test_index) {
    require(tests[k].node == s.model.tree().root(), ErrorCode::kInvalidConfig,
            "test function '" + tests[k].name + "' is not defined at the root");
    s.test_names.push_back(tests[k].name);
  }
  for (const auto& [node, count] : config.node_n) {
    require(s.model.tree().contains(node), ErrorCode::kInvalidConfig,
            "node_n names node " + std::to_string(node) + ", which is not in the tree");
  }
  if (s.model.oracle) {
    std::vector<TestFunction> selected;
    for (const std::size_t k : s.test_index) {
      selected.push_back(tests[k]);
    }
    s.oracle = oracle_eval(s.model, s.model.tree().root(), selected);
  }
  if (config.baseline == Baseline::kAsmc) {
    s.line = lumped_model(s.model);
  }
  return s;
}

Row run_one(const Setup& s, const std::string& engine, std::size_t n, std::uint64_t replicate) {
  Row row;
  row.engine = engine;
  row.n = n;
  row.replicate = replicate;
  const bool baseline = engine == "asmc";
  const ModelSpec& model = baseline ? *s.line : s.model;
  try {
    EngineOptions opts;
    opts.n = n;
    opts.seed = s.config.seed;
    opts.replicate = replicate;
    opts.parallel_children = s.config.parallel_children;
    opts.materialization_cap = s.config.materialization_cap;
    if (baseline) {
      opts.strategy = Strategy{Strategy::Kind::kGeneric};
    } else {
      opts.strategy = s.config.strategy;
      opts.node_strategy = s.config.node_strategy;
      if (!s.config.node_n.empty()) {
        opts.node_n.assign(model.tree().size(), n);
        for (const auto& [node, count] : s.config.node_n) {
          opts.node_n[node] = count;
        }
      }
    }
    TraceSink sink;
    if (s.config.trace_nodes) {
      opts.trace = &sink;
    }
    std::optional<ParticleCloud> cloud;
    const NodeId root = model.tree().root();
    if (s.config.ess_threshold) {
      opts.ess_threshold = *s.config.ess_threshold;
      cloud.emplace(dac_smc_adaptive(model, root, opts));
    } else {
      cloud.emplace(dac_smc(model, root, opts));
    }
    std::vector<TestFunction> tests;
    for (const std::size_t k : s.test_index) {
      tests.push_back(model.test_functions[k]);
    }
    const TargetEstimates est = target_estimates(*cloud, model, tests);
    row.log_z = est.log_z;
    row.mu = est.mu;
    for (const TraceRecord& r : sink.records()) {
      row.node_log_mass.push_back(r.log_mass);
      row.node_ess.push_back(r.ess);
    }
    row.ok = std::isfinite(row.log_z);
    if (!row.ok) {
      row.error = "NonFiniteWeight: log Z estimate is not finite";
    }
  } catch (const Error& e) {
    row.error = std::string{to_string(e.code())} + ": " + e.what();
  } catch (const std::exception& e) {
    row.error = std::string{"Internal: "} + e.what();
  }
  if (!row.ok) {
    row.log_z = std::nan("");
    row.mu.assign(s.test_index.size(), std::nan(""));
    row.node_log_mass.clear();
    row.node_ess.clear();
  }
  return row;
}

/// Runs replicates 0..R-1 on a worker pool; the output is indexed by replicate.
std::vector<Row> run_cell(const Setup& s, const std::string& engine, std::size_t n) {
  const std::size_t reps = s.config.replicates;
  std::vector<Row> rows(reps);
  std::size_t workers = s.config.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : s.config.threads;
  workers = std::min(workers, reps);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      rows[r] = run_one(s, engine, n, r);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back(work);
    }
  }
  return rows;
}

void add_rates(EstimateReport& report, const std::string& engine) {
  std::vector<const CellAggregate*> cells;
  for (const auto& a : report.aggregates) {
    if (a.engine == engine) {
      cells.push_back(&a);
    }
  }
  const auto fit = [&](const std::string& quantity, auto value) {
    std::vector<std::pair<double, double>> points;
    for (const CellAggregate* c : cells) {
      const std::optional<double> v = value(*c);
      if (v && *v > 0.0 && std::isfinite(*v)) {
        points.emplace_back(std::log(static_cast<double>(c->n)), std::log(*v));
      }
    }
    try {
      report.rates.push_back(RateFit{engine, quantity, slope_fit(points)});
    } catch (const Error&) {
      // fewer than three usable points: no rate for this quantity
    }
  };
  if (!report.oracle_log_z) {
    return;
  }
  fit("rmse_z", [](const CellAggregate& c) { return c.rmse_z; });
  for (std::size_t k = 0; k < report.test_names.size(); ++k) {
    const std::string& name = report.test_names[k];
    fit("bias_mu:" + name, [k](const CellAggregate& c) {
      return c.tests[k].bias_mu ? std::optional<double>{std::abs(*c.tests[k].bias_mu)} : std::nullopt;
    });
    fit("rmse_mu:" + name, [k](const CellAggregate& c) { return c.tests[k].rmse_mu; });
    fit("rmse_rho:" + name, [k](const CellAggregate& c) { return c.tests[k].rmse_rho; });
  }
}

std::vector<ComparisonRow> compare_rows(const EstimateReport& report) {
  std::vector<ComparisonRow> out;
  for (const std::size_t n : report.config.n) {
    std::vector<double> dac;
    std::vector<double> asmc;
    std::map<std::uint64_t, const Row*> baseline_rows;
    for (const Row& r : report.rows) {
      if (r.engine == "asmc" && r.n == n && r.ok) {
        baseline_rows[r.replicate] = &r;
      }
    }
    const double ref = report.oracle_log_z.value_or(0.0);
    for (const Row& r : report.rows) {
      if (r.engine != "dac" || r.n != n || !r.ok) {
        continue;
      }
      const auto it = baseline_rows.find(r.replicate);
      if (it != baseline_rows.end()) {
        dac.push_back(std::exp(r.log_z - ref));
        asmc.push_back(std::exp(it->second->log_z - ref));
      }
    }
    if (dac.size() < 2) {
      continue;
    }
    ComparisonRow row;
    row.n = n;
    row.variances = compare_variances(dac, asmc);
    row.dac_not_worse = row.variances.difference <= report.variance_band * row.variances.se_difference;
    out.push_back(row);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  check_keys(j,
             {"model", "params", "n", "replicates", "seed", "strategy", "node_strategy", "node_n", "ess_threshold",
              "tests", "baseline", "trace_nodes", "threads", "parallel_children", "materialization_cap", "out",
              "format"},
             "experiment config");
  ExperimentConfig c;
  try {
    read(j, "model", c.model);
    if (j.contains("params")) {
      c.params = j.at("params");
    }
    if (j.contains("n")) {
      c.n = j.at("n").is_array() ? j.at("n").get<std::vector<std::size_t>>()
                                 : std::vector<std::size_t>{j.at("n").get<std::size_t>()};
    }
    read(j, "replicates", c.replicates);
    read(j, "seed", c.seed);
    if (j.contains("strategy")) {
      c.strategy = Strategy::parse(j.at("strategy").get<std::string>());
    }
    if (j.contains("node_strategy")) {
      for (const auto& [key, value] : j.at("node_strategy").items()) {
        c.node_strategy[node_key(key)] = Strategy::parse(value.get<std::string>());
      }
    }
    if (j.contains("node_n")) {
      for (const auto& [key, value] : j.at("node_n").items()) {
        c.node_n[node_key(key)] = value.get<std::size_t>();
      }
    }
    if (j.contains("ess_threshold") && !j.at("ess_threshold").is_null()) {
      c.ess_threshold = j.at("ess_threshold").get<double>();
    }
    read(j, "tests", c.tests);
    if (j.contains("baseline")) {
      const auto b = j.at("baseline").get<std::string>();
      if (b != "none" && b != "asmc") {
        bad_config("baseline must be 'none' or 'asmc', got '" + b + "'");
      }
      c.baseline = b == "asmc" ? Baseline::kAsmc : Baseline::kNone;
    }
    read(j, "trace_nodes", c.trace_nodes);
    read(j, "threads", c.threads);
    read(j, "parallel_children", c.parallel_children);
    read(j, "materialization_cap", c.materialization_cap);
    read(j, "out", c.out);
    if (j.contains("format")) {
      const auto f = j.at("format").get<std::string>();
      if (f != "csv" && f != "json") {
        bad_config("format must be 'csv' or 'json', got '" + f + "'");
      }
      c.format = f == "json" ? OutputFormat::kJson : OutputFormat::kCsv;
    }
  } catch (const json::exception& e) {
    bad_config(std::string{"malformed experiment config: "} + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidConfig) {
      throw;
    }
    bad_config(e.what());
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["model"] = model;
  j["params"] = params;
  j["n"] = n;
  j["replicates"] = replicates;
  j["seed"] = seed;
  j["strategy"] = strategy.to_string();
  json ns = json::object();
  for (const auto& [node, s] : node_strategy) {
    ns[std::to_string(node)] = s.to_string();
  }
  j["node_strategy"] = ns;
  json nn = json::object();
  for (const auto& [node, count] : node_n) {
    nn[std::to_string(node)] = count;
  }
  j["node_n"] = nn;
  j["ess_threshold"] = optional_json(ess_threshold);
  j["tests"] = tests;
  j["baseline"] = baseline == Baseline::kAsmc ? "asmc" : "none";
  j["trace_nodes"] = trace_nodes;
  j["threads"] = threads;
  j["parallel_children"] = parallel_children;
  j["materialization_cap"] = materialization_cap;
  j["out"] = out;
  j["format"] = format == OutputFormat::kJson ? "json" : "csv";
  return j;
}

void ExperimentConfig::validate() const {
  require(!n.empty(), ErrorCode::kInvalidConfig, "the particle count schedule is empty");
  for (std::size_t k = 0; k < n.size(); ++k) {
    require(n[k] >= 1, ErrorCode::kInvalidConfig, "particle counts must be positive");
    require(k == 0 || n[k] > n[k - 1], ErrorCode::kInvalidConfig, "the particle count schedule must be increasing");
  }
  require(replicates >= 2, ErrorCode::kInvalidConfig, "variance statistics need at least 2 replicates");
  require(!ess_threshold || (*ess_threshold >= 0.0 && std::isfinite(*ess_threshold)), ErrorCode::kInvalidConfig,
          "ess_threshold must be a finite non-negative number");
  for (const auto& [node, count] : node_n) {
    require(count >= 1, ErrorCode::kInvalidConfig, "node_n counts must be positive");
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in{path};
  require(in.good(), ErrorCode::kIo, "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    bad_config(path + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

// ---------------------------------------------------------------------------
// Model registry

std::vector<std::string> model_ids() { return {"discrete_toy", "gaussian_tree", "schools", "timevarying"}; }

ModelSpec build_model(const std::string& id, const json& params) {
  try {
    if (id == "discrete_toy") {
      check_keys(params, {"depth", "branching", "alphabet", "seed", "structure", "uniform", "spread"}, "discrete_toy");
      DiscreteToyConfig c;
      read(params, "depth", c.depth);
      read(params, "branching", c.branching);
      read(params, "alphabet", c.alphabet);
      read(params, "seed", c.seed);
      read(params, "uniform", c.uniform);
      read(params, "spread", c.spread);
      const std::string s = params.value("structure", "general");
      if (s == "general") {
        c.structure = ToyStructure::kGeneral;
      } else if (s == "factorized") {
        c.structure = ToyStructure::kFactorized;
      } else if (s == "mixture") {
        c.structure = ToyStructure::kMixture;
      } else {
        bad_config("discrete_toy structure must be general, factorized or mixture, got '" + s + "'");
      }
      return discrete_toy(c);
    }
    if (id == "gaussian_tree") {
      check_keys(params, {"depth", "branching", "beta", "correlated", "correlation", "threshold"}, "gaussian_tree");
      GaussianTreeConfig c;
      read(params, "depth", c.depth);
      read(params, "branching", c.branching);
      read(params, "beta", c.beta);
      read(params, "correlated", c.correlated);
      read(params, "correlation", c.correlation);
      read(params, "threshold", c.threshold);
      return gaussian_tree(c);
    }
    if (id == "schools") {
      check_keys(params, {"data"}, "schools");
      return schools_model(load_schools_csv(params.value("data", std::string{DACSMC_DEFAULT_SCHOOLS_CSV})));
    }
    if (id == "timevarying") {
      check_keys(params, {"horizon", "units", "variant", "data_seed", "y"}, "timevarying");
      TimeVaryingConfig c;
      read(params, "horizon", c.horizon);
      read(params, "units", c.units);
      read(params, "data_seed", c.data_seed);
      read(params, "y", c.y);
      const std::string v = params.value("variant", "nested");
      if (v != "nested" && v != "conditional") {
        bad_config("timevarying variant must be nested or conditional, got '" + v + "'");
      }
      c.variant = v == "conditional" ? TimeVaryingVariant::kConditional : TimeVaryingVariant::kNested;
      return timevarying_model(c);
    }
  } catch (const json::exception& e) {
    bad_config("bad parameters for model '" + id + "': " + e.what());
  }
  bad_config("unknown model '" + id + "'");
}

// ---------------------------------------------------------------------------
// Aggregates

CellAggregate aggregate_cell(std::string engine, std::size_t n, std::span<const Row> rows,
                             std::span<const std::string> test_names, const std::optional<OracleValues>& oracle) {
  CellAggregate a;
  a.engine = std::move(engine);
  a.n = n;
  std::vector<const Row*> good;
  for (const Row& r : rows) {
    (r.ok ? a.successes : a.failures) += 1;
    if (r.ok) {
      good.push_back(&r);
    }
  }
  std::vector<double> log_z;
  for (const Row* r : good) {
    log_z.push_back(r->log_z);
  }
  a.log_z = summarize(log_z);
  a.reference_is_oracle = oracle.has_value();
  a.log_z_reference = oracle ? oracle->log_z : a.log_z.mean;
  std::vector<double> z;
  for (const double l : log_z) {
    z.push_back(std::exp(l - a.log_z_reference));
  }
  a.z = summarize(z);
  if (oracle && !z.empty()) {
    a.bias_z = a.z.mean - 1.0;
    std::vector<double> sq;
    for (const double v : z) {
      sq.push_back((v - 1.0) * (v - 1.0));
    }
    a.rmse_z = std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));
  }
  for (std::size_t k = 0; k < test_names.size(); ++k) {
    TestAggregate t;
    t.name = test_names[k];
    std::vector<double> mu;
    for (const Row* r : good) {
      mu.push_back(r->mu[k]);
    }
    t.mu = summarize(mu);
    if (oracle && !mu.empty()) {
      const double truth = oracle->mu[k];
      t.oracle_mu = truth;
      t.bias_mu = t.mu.mean - truth;
      std::vector<double> sq_mu;
      std::vector<double> sq_rho;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        sq_mu.push_back((mu[i] - truth) * (mu[i] - truth));
        const double rho = z[i] * mu[i];
        sq_rho.push_back((rho - truth) * (rho - truth));
      }
      t.rmse_mu = std::sqrt(pairwise_sum(sq_mu) / static_cast<double>(mu.size()));
      t.rmse_rho = std::sqrt(pairwise_sum(sq_rho) / static_cast<double>(mu.size()));
    }
    a.tests.push_back(std::move(t));
  }
  if (z.size() >= 500) {
    a.normality = gof_tests(z);
  }
  return a;
}

bool EstimateReport::all_succeeded() const noexcept {
  return std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.ok; });
}

EstimateReport run_experiment(const ExperimentConfig& config) {
  const Setup setup = make_setup(config);
  EstimateReport report;
  report.config = config;
  report.model_name = setup.model.name();
  report.test_names = setup.test_names;
  if (setup.oracle) {
    report.oracle_log_z = setup.oracle->log_z;
  }
  std::vector<std::string> engines{"dac"};
  if (config.baseline == Baseline::kAsmc) {
    engines.emplace_back("asmc");
  }
  // Rows sorted by (N, replicate), engines in a fixed order within an N.
  for (const std::size_t n : config.n) {
    for (const std::string& engine : engines) {
      const auto start = std::chrono::steady_clock::now();
      std::vector<Row> rows = run_cell(setup, engine, n);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      report.cell_seconds.emplace_back(engine + ":" + std::to_string(n), elapsed.count());
      report.aggregates.push_back(aggregate_cell(engine, n, rows, setup.test_names, setup.oracle));
      report.rows.insert(report.rows.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.n, a.replicate) < std::tie(b.n, b.replicate);
  });
  for (const std::string& engine : engines) {
    add_rates(report, engine);
  }
  if (config.baseline == Baseline::kAsmc) {
    report.comparisons = compare_rows(report);
  }
  return report;
}

std::vector<ComparisonRow> paired_compare(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.baseline = Baseline::kAsmc;
  return run_experiment(c).comparisons;
}

// ---------------------------------------------------------------------------
// Output

void write_rows_csv(const EstimateReport& report, std::ostream& out) {
  std::size_t nodes = 0;
  for (const Row& r : report.rows) {
    nodes = std::max(nodes, r.node_log_mass.size());
  }
  out << "# dacsmc rows schema=" << kRowsSchemaVersion << " model=" << report.model_name << "\n";
  out << "engine,n,replicate,status,error,log_z";
  for (const auto& name : report.test_names) {
    out << "," << csv_field("mu:" + name);
  }
  for (std::size_t u = 0; u < nodes; ++u) {
    out << ",node" << u << "_log_mass,node" << u << "_ess";
  }
  out << "\n";
  for (const Row& r : report.rows) {
    out << r.engine << "," << r.n << "," << r.replicate << "," << (r.ok ? "ok" : "failed") << ","
        << csv_field(r.error) << "," << format_double(r.log_z);
    for (const double m : r.mu) {
      out << "," << format_double(m);
    }
    for (std::size_t u = 0; u < nodes; ++u) {
      if (u < r.node_log_mass.size()) {
        out << "," << format_double(r.node_log_mass[u]) << "," << format_double(r.node_ess[u]);
      } else {
        out << ",,";
      }
    }
    out << "\n";
  }
}

std::vector<Row> read_rows_csv(std::istream& in, std::vector<std::string>* test_names) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line.rfind("# dacsmc rows schema=", 0) == 0,
          ErrorCode::kInvalidData, "missing rows schema line");
  const int version = std::atoi(line.c_str() + std::string{"# dacsmc rows schema="}.size());
  require(version == kRowsSchemaVersion, ErrorCode::kInvalidData,
          "unsupported rows schema version " + std::to_string(version));
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kInvalidData, "missing rows header");
  const auto header = split_csv_line(line);
  require(header.size() >= 6 && header[0] == "engine" && header[5] == "log_z", ErrorCode::kInvalidData,
          "unexpected rows header");
  std::size_t tests = 0;
  while (6 + tests < header.size() && header[6 + tests].rfind("mu:", 0) == 0) {
    if (test_names != nullptr) {
      test_names->push_back(header[6 + tests].substr(3));
    }
    ++tests;
  }
  const std::size_t nodes = (header.size() - 6 - tests) / 2;
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto f = split_csv_line(line);
    require(f.size() == header.size(), ErrorCode::kInvalidData, "row has " + std::to_string(f.size()) +
                                                                    " fields, header has " +
                                                                    std::to_string(header.size()));
    Row r;
    r.engine = f[0];
    r.n = std::stoul(f[1]);
    r.replicate = std::stoull(f[2]);
    r.ok = f[3] == "ok";
    r.error = f[4];
    r.log_z = parse_double(f[5]);
    for (std::size_t k = 0; k < tests; ++k) {
      r.mu.push_back(parse_double(f[6 + k]));
    }
    for (std::size_t u = 0; u < nodes; ++u) {
      const std::string& m = f[6 + tests + 2 * u];
      if (!m.empty()) {
        r.node_log_mass.push_back(parse_double(m));
        r.node_ess.push_back(parse_double(f[7 + tests + 2 * u]));
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

json aggregates_json(const EstimateReport& report) {
  json cells = json::array();
  for (const CellAggregate& a : report.aggregates) {
    json c;
    c["engine"] = a.engine;
    c["n"] = a.n;
    c["successes"] = a.successes;
    c["failures"] = a.failures;
    c["log_z"] = summary_json(a.log_z);
    c["log_z_reference"] = a.log_z_reference;
    c["reference_is_oracle"] = a.reference_is_oracle;
    c["z_relative"] = summary_json(a.z);
    c["bias_z"] = optional_json(a.bias_z);
    c["rmse_z"] = optional_json(a.rmse_z);
    json tests = json::array();
    for (const TestAggregate& t : a.tests) {
      tests.push_back({{"name", t.name},
                       {"mu", summary_json(t.mu)},
                       {"oracle_mu", optional_json(t.oracle_mu)},
                       {"bias_mu", optional_json(t.bias_mu)},
                       {"rmse_mu", optional_json(t.rmse_mu)},
                       {"rmse_rho", optional_json(t.rmse_rho)}});
    }
    c["tests"] = tests;
    if (a.normality) {
      const auto& g = *a.normality;
      c["normality"] = {{"count", g.count},
                        {"skewness", g.skewness},
                        {"excess_kurtosis", g.excess_kurtosis},
                        {"anderson_darling", g.anderson_darling},
                        {"p_value", g.p_value},
                        {"degenerate", g.degenerate}};
    } else {
      c["normality"] = nullptr;
    }
    cells.push_back(c);
  }
  json rates = json::array();
  for (const RateFit& r : report.rates) {
    rates.push_back({{"engine", r.engine},
                     {"quantity", r.quantity},
                     {"slope", r.fit.slope},
                     {"stderr", r.fit.stderr_slope},
                     {"band", {r.fit.slope - 2.0 * r.fit.stderr_slope, r.fit.slope + 2.0 * r.fit.stderr_slope}},
                     {"points", r.fit.points}});
  }
  json comparisons = json::array();
  for (const ComparisonRow& c : report.comparisons) {
    comparisons.push_back({{"n", c.n},
                           {"variance_dac", c.variances.variance_a},
                           {"variance_asmc", c.variances.variance_b},
                           {"difference", c.variances.difference},
                           {"se_difference", c.variances.se_difference},
                           {"dac_not_worse", c.dac_not_worse}});
  }
  json timing = json::object();
  for (const auto& [cell, seconds] : report.cell_seconds) {
    timing[cell] = seconds;
  }
  return {{"schema", kRowsSchemaVersion},
          {"model", report.model_name},
          {"config", report.config.to_json()},
          {"oracle_log_z", optional_json(report.oracle_log_z)},
          {"thresholds", {{"unbiased_se_band", report.unbiased_band}, {"variance_se_band", report.variance_band}}},
          {"cells", cells},
          {"rates", rates},
          {"comparisons", comparisons},
          {"timing_seconds", timing},
          {"all_succeeded", report.all_succeeded()}};
}

json report_json(const EstimateReport& report) {
  json j = aggregates_json(report);
  std::ostringstream rows;
  write_rows_csv(report, rows);
  j["rows_csv"] = rows.str();
  return j;
}

}  // namespace dacsmc
