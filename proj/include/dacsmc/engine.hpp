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


#ifndef DACSMC_ENGINE_HPP
#define DACSMC_ENGINE_HPP

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dacsmc/model_spec.hpp"
#include "dacsmc/particle.hpp"
#include "dacsmc/resampling.hpp"

namespace dacsmc {

/// How the product-form correction and resampling is carried out at a node.
struct Strategy {
  enum class Kind { kAuto, kGeneric, kFactorized, kMixture, kNested, kIncomplete };

  Kind kind{Kind::kAuto};
  /// Incomplete only: number of index tuples. Ignored when diagonal is set.
  std::size_t budget{0};
  /// Incomplete only: use the single zero-offset block.
  bool diagonal{false};

  /// Parses "auto", "generic", "factorized", "mixture", "nested", "incomplete:BUDGET" or "incomplete:diag".
  static Strategy parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;

  bool operator==(const Strategy&) const = default;
};

/// One line of the per-node trace.
struct TraceRecord {
  NodeId node{0};
  std::size_t n{0};
  std::string strategy;
  double log_mass{0.0};
  double log_children_mass{0.0};
  /// ESS of the diagonal correction weights; NaN where it has no pointwise form.
  double ess{0.0};
  bool resampled{true};
  double seconds{0.0};
};

/// Thread-safe collector; records come back sorted by node.
class TraceSink {
 public:
  void record(TraceRecord r);
  [[nodiscard]] std::vector<TraceRecord> records() const;

 private:
  mutable std::mutex mutex_;
  std::vector<TraceRecord> records_;
};

struct EngineOptions {
  std::size_t n{128};
  /// Per-node particle counts; when non-empty it must cover every node.
  std::vector<std::size_t> node_n;
  Strategy strategy;
  std::map<NodeId, Strategy> node_strategy;
  /// Adaptive runs only: resample at an internal node when ESS < threshold * N.
  double ess_threshold{0.5};
  std::uint64_t seed{0};
  std::uint64_t replicate{0};
  bool parallel_children{false};
  std::size_t materialization_cap{std::size_t{1} << 22};
  NestedOptions nested;
  TraceSink* trace{nullptr};
};

/**
 * Divide-and-conquer SMC at node u: recurse into the children, correct with
 * the product-form estimator, resample, mutate with K_u.
 *
 * Leaves draw from their proposal with unit mass. The returned cloud is
 * unweighted. Results depend only on (model, u, options) and not on thread
 * scheduling: every node draws from its own addressed streams.
 */
[[nodiscard]] ParticleCloud dac_smc(const ModelSpec& model, NodeId u, const EngineOptions& options);

/**
 * dac_smc with resampling skipped at internal nodes whose diagonal
 * correction ESS is at least threshold * N. A skipping node carries the
 * weighted diagonal of its children after independent uniform cyclic shifts,
 * keeping the estimator unbiased. The node u itself always resamples.
 * A threshold above one reproduces dac_smc exactly.
 */
[[nodiscard]] ParticleCloud dac_smc_adaptive(const ModelSpec& model, NodeId u, const EngineOptions& options);

/**
 * The level-lumped line model: line node t carries every original node at
 * depth height - t, with the product of their proposals or kernels as kernel
 * and the product of their auxiliary weights as a general weight. The target
 * weight and test functions of the original root carry over to the top.
 */
[[nodiscard]] ModelSpec lumped_model(const ModelSpec& model);

/// Maps a path of the lumped top node to the layout of the original root.
[[nodiscard]] std::vector<std::size_t> lumped_to_original(const ModelSpec& model);

/// Standard SMC baseline: dac_smc on lumped_model(model) with the generic strategy.
[[nodiscard]] ParticleCloud asmc_run(const ModelSpec& model, const EngineOptions& options);

}  // namespace dacsmc

#endif  // DACSMC_ENGINE_HPP
