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


#ifndef DACSMC_MODELS_HPP
#define DACSMC_MODELS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dacsmc/model_spec.hpp"

/**
 * \file
 * \brief Built-in models. Every weight structure is exercised by at least one
 * of them; the discrete toy and the Gaussian tree carry exact oracles.
 */

namespace dacsmc {

// ---------------------------------------------------------------------------
// Discrete toy

enum class ToyStructure { kGeneral, kFactorized, kMixture };

struct DiscreteToyConfig {
  std::size_t depth{1};
  std::size_t branching{2};
  std::size_t alphabet{2};
  std::uint64_t seed{1};
  ToyStructure structure{ToyStructure::kGeneral};
  /// Every weight one and every proposal uniform, so Z_u = 1 everywhere.
  bool uniform{false};
  /// Log weights are uniform on [-spread, spread].
  double spread{0.7};
};

/**
 * Random positive tables of a discrete toy, indexed by node. Values are
 * stored as probabilities or weights, not logs.
 */
struct DiscreteToyTables {
  std::size_t alphabet{0};
  Tree tree;
  /// Leaves: proposal over the own value.
  std::vector<std::vector<double>> leaf_proposal;
  /// Internal nodes: kernel[u][code * alphabet + x_u], code = children own values in base alphabet.
  std::vector<std::vector<double>> kernel;
  /// General: aux[u][code]. Factorized: factor[u][j][x_child]. Mixture: mixture[u][i][j][x_child].
  std::vector<std::vector<double>> aux;
  std::vector<std::vector<std::vector<double>>> factor;
  std::vector<std::vector<std::vector<std::vector<double>>>> mixture;
  /// Target weight over the own value, every node.
  std::vector<std::vector<double>> target;
  ToyStructure structure{ToyStructure::kGeneral};
};

/// The tables behind discrete_toy(config). Throws kTooLarge above 10^6 configurations.
[[nodiscard]] DiscreteToyTables discrete_toy_tables(const DiscreteToyConfig& config);

/**
 * Complete tree of the given depth and branching, node ids in breadth-first
 * order with the root at 0. Test function "root_is_zero" indicates x_root = 0.
 * The oracle enumerates configurations.
 */
[[nodiscard]] ModelSpec discrete_toy(const DiscreteToyConfig& config);

// ---------------------------------------------------------------------------
// Gaussian tree

struct GaussianTreeConfig {
  std::size_t depth{2};
  std::size_t branching{2};
  /// x_u = beta * mean(children) + noise.
  double beta{0.5};
  /// Couples the noises of the root's first two children.
  bool correlated{false};
  double correlation{0.5};
  /// Test function "root_above" indicates x_root > threshold.
  double threshold{0.0};
};

/// Joint covariance of all nodes, in node id order.
[[nodiscard]] std::vector<double> gaussian_tree_covariance(const GaussianTreeConfig& config);

/**
 * Scalar Gaussian per node with subtree marginals as intermediate targets
 * and exact conditionals as kernels; rho_u(x) = exp(-x' S_u^{-1} x / 2).
 * In the uncorrelated configuration every auxiliary weight is constant.
 */
[[nodiscard]] ModelSpec gaussian_tree(const GaussianTreeConfig& config);

// ---------------------------------------------------------------------------
// Schools

struct SchoolYear {
  std::string year;
  int total{0};
  int passed{0};
};

struct School {
  std::string name;
  std::vector<SchoolYear> years;
};

/// Reads "school,year,M,m" rows (with header); schools keep their first-seen order.
[[nodiscard]] std::vector<School> load_schools_csv(const std::string& path);

/**
 * root -> schools -> years. Leaves are logit(Beta(m + 1, M - m + 1)) draws;
 * internal nodes carry (theta, sigma^2). Throws kInvalidCounts.
 */
[[nodiscard]] ModelSpec schools_model(const std::vector<School>& data);

/// Log weight of a school or root node: log g(theta) - SS / (2 s2) - log(k) / 2 - (k - 1) log(2 pi s2) / 2.
[[nodiscard]] double schools_node_log_weight(double theta, double s2, std::span<const double> child_thetas);

// ---------------------------------------------------------------------------
// Time-varying hierarchical model

enum class TimeVaryingVariant { kNested, kConditional };

struct TimeVaryingConfig {
  std::size_t horizon{1};
  std::size_t units{1};
  TimeVaryingVariant variant{TimeVaryingVariant::kNested};
  /// y[t][l]; empty means simulate from the prior with data_seed.
  std::vector<std::vector<double>> y;
  std::uint64_t data_seed{7};
};

/// Simulated observations for (horizon + 1) x units.
[[nodiscard]] std::vector<std::vector<double>> simulate_timevarying_data(std::size_t horizon, std::size_t units,
                                                                         std::uint64_t seed);

/**
 * theta_t at node t, the dummy root at T + 1, unit (t, l) at T + 2 + t L + l.
 * The pivot of node t + 1 is its first child theta_t. Throws kInvalidData.
 */
[[nodiscard]] ModelSpec timevarying_model(const TimeVaryingConfig& config);

// ---------------------------------------------------------------------------

struct OracleValues {
  double log_z{0.0};
  std::vector<double> mu;
};

/// Exact log Z_u and mu_u for test functions at u. Throws kNoOracle.
[[nodiscard]] OracleValues oracle_eval(const ModelSpec& model, NodeId u, std::span<const TestFunction> tests);

}  // namespace dacsmc

#endif  // DACSMC_MODELS_HPP
