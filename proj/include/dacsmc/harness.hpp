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

#ifndef DACSMC_HARNESS_HPP
#define DACSMC_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dacsmc/engine.hpp"
#include "dacsmc/models.hpp"
#include "dacsmc/stats.hpp"
#include "json.hpp"

/**
 * \file
 * \brief Replicated experiments: configuration, model registry, raw rows,
 * aggregates against oracles, rate fits and baseline comparisons.
 */

namespace dacsmc {

enum class Baseline { kNone, kAsmc };
enum class OutputFormat { kCsv, kJson };

struct ExperimentConfig {
  std::string model{"discrete_toy"};
  /// Model parameters; keys depend on the model id.
  nlohmann::json params = nlohmann::json::object();
  /// Strictly increasing particle counts.
  std::vector<std::size_t> n{64};
  std::size_t replicates{100};
  std::uint64_t seed{0};
  Strategy strategy;
  std::map<NodeId, Strategy> node_strategy;
  /// Fixed particle counts for some nodes; the schedule applies elsewhere.
  std::map<NodeId, std::size_t> node_n;
  /// Set: adaptive resampling with this threshold.
  std::optional<double> ess_threshold;
  /// Test function names to report; empty means all.
  std::vector<std::string> tests;
  Baseline baseline{Baseline::kNone};
  /// Adds per-node log mass and ESS columns to the rows.
  bool trace_nodes{false};
  /// Replicate workers; 0 uses the hardware concurrency.
  std::size_t threads{0};
  bool parallel_children{false};
  std::size_t materialization_cap{std::size_t{1} << 22};
  std::string out;
  OutputFormat format{OutputFormat::kCsv};

  /// Throws kInvalidConfig with the offending key.
  static ExperimentConfig from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
  /// Throws kInvalidConfig when the invariants fail (R >= 2, increasing N, ...).
  void validate() const;
};

/// Reads a JSON experiment file. Throws kIo or kInvalidConfig.
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Ids accepted by build_model.
[[nodiscard]] std::vector<std::string> model_ids();
/// Builds a registered model from its id and parameters. Throws kInvalidConfig for unknown ids or keys.
[[nodiscard]] ModelSpec build_model(const std::string& id, const nlohmann::json& params);

/// One engine run.
struct Row {
  std::string engine;
  std::size_t n{0};
  std::uint64_t replicate{0};
  bool ok{false};
  std::string error;
  double log_z{0.0};
  std::vector<double> mu;
  std::vector<double> node_log_mass;
  std::vector<double> node_ess;
};

struct TestAggregate {
  std::string name;
  Summary mu;
  std::optional<double> oracle_mu;
  std::optional<double> bias_mu;
  std::optional<double> rmse_mu;
  /// RMSE of rho^N / Z against mu, where Z is the oracle constant.
  std::optional<double> rmse_rho;
};

struct CellAggregate {
  std::string engine;
  std::size_t n{0};
  std::size_t successes{0};
  std::size_t failures{0};
  Summary log_z;
  /// Z^N is reported relative to exp(log_z_reference).
  double log_z_reference{0.0};
  bool reference_is_oracle{false};
  Summary z;
  std::optional<double> bias_z;
  std::optional<double> rmse_z;
  std::vector<TestAggregate> tests;
  /// Present when the cell has at least 500 successful rows.
  std::optional<NormalityDiagnostics> normality;
};

struct RateFit {
  std::string engine;
  /// "bias_mu:<test>", "rmse_mu:<test>", "rmse_rho:<test>" or "rmse_z".
  std::string quantity;
  SlopeFit fit;
};

struct ComparisonRow {
  std::size_t n{0};
  VarianceComparison variances;
  /// Var_DaC <= Var_ASMC + band * SE.
  bool dac_not_worse{false};
};

struct EstimateReport {
  ExperimentConfig config;
  std::string model_name;
  std::vector<std::string> test_names;
  std::optional<double> oracle_log_z;
  std::vector<Row> rows;
  std::vector<CellAggregate> aggregates;
  std::vector<RateFit> rates;
  std::vector<ComparisonRow> comparisons;
  /// Wall time per (engine, N) cell, kept out of the rows so they stay reproducible.
  std::vector<std::pair<std::string, double>> cell_seconds;
  double unbiased_band{4.0};
  double variance_band{3.0};

  [[nodiscard]] bool all_succeeded() const noexcept;
};

/// Runs every (engine, N) cell. Engine errors become failure rows; config errors throw.
[[nodiscard]] EstimateReport run_experiment(const ExperimentConfig& config);

/// DaC against the lumped baseline over the config's schedule.
[[nodiscard]] std::vector<ComparisonRow> paired_compare(const ExperimentConfig& config);

/// Aggregates of the rows of one cell; pure in the rows and the oracle.
[[nodiscard]] CellAggregate aggregate_cell(std::string engine, std::size_t n, std::span<const Row> rows,
                                           std::span<const std::string> test_names,
                                           const std::optional<OracleValues>& oracle);

constexpr int kRowsSchemaVersion = 1;

void write_rows_csv(const EstimateReport& report, std::ostream& out);
[[nodiscard]] nlohmann::json aggregates_json(const EstimateReport& report);
/// Aggregates plus rows.
[[nodiscard]] nlohmann::json report_json(const EstimateReport& report);
/// Parses what write_rows_csv wrote. Throws kInvalidData.
[[nodiscard]] std::vector<Row> read_rows_csv(std::istream& in, std::vector<std::string>* test_names = nullptr);

}  // namespace dacsmc

#endif  // DACSMC_HARNESS_HPP
