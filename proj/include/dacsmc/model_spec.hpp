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

#ifndef DACSMC_MODEL_SPEC_HPP
#define DACSMC_MODEL_SPEC_HPP

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dacsmc/rng.hpp"
#include "dacsmc/tree.hpp"

/**
 * \file
 * \brief Programmatic description of a tree-structured target: proposals,
 * kernels, auxiliary weights with their factorization structure, target
 * weights, test functions and an optional exact oracle.
 *
 * All weights are carried as natural logarithms.
 */

namespace dacsmc {

using PathView = std::span<const double>;
using MutablePathView = std::span<double>;

/// Log of a positive weight evaluated on a flat path.
using LogWeightFn = std::function<double(PathView)>;
/// Draws a leaf's own coordinates.
using LeafSampler = std::function<void(RngStream&, MutablePathView own)>;
/// Draws an internal node's own coordinates given the concatenated children path.
using KernelSampler = std::function<void(PathView children_path, RngStream&, MutablePathView own)>;

/// Auxiliary weight over the concatenated children path, with no structure.
struct GeneralWeight {
  LogWeightFn log_weight;
};

/// Product of per-child factors, each evaluated on that child's own subtree path.
struct FactorizedWeight {
  std::vector<LogWeightFn> factors;
};

/// Sum over components of products of per-child factors.
struct MixtureWeight {
  /// components[i][j] is the factor of component i for child position j.
  std::vector<std::vector<LogWeightFn>> components;
};

/**
 * Weight of the form outer(pivot) * prod_l inner(pivot, unit_l): one pivot child
 * and units conditionally factorized given it.
 *
 * In conditional mode the units are not taken from the unit children's clouds:
 * for each pivot particle, unit draws come from `conditional_unit` and carry
 * equal inner weights.
 */
struct NestedWeight {
  /// Child position of the pivot.
  std::size_t pivot{0};
  /// Optional; an empty function means a factor of one.
  LogWeightFn outer;
  /// Unit index l counts the non-pivot children in child order.
  std::function<double(PathView pivot_path, std::size_t unit, PathView unit_path)> inner;
  std::function<void(PathView pivot_path, std::size_t unit, RngStream&, MutablePathView out)> conditional_unit;

  [[nodiscard]] bool conditional() const noexcept { return static_cast<bool>(conditional_unit); }
};

using WeightStructure = std::variant<GeneralWeight, FactorizedWeight, MixtureWeight, NestedWeight>;

/// Short structure name: "general", "factorized", "mixture" or "nested".
[[nodiscard]] std::string structure_name(const WeightStructure& weight);

/// A bounded test function on the path space of one node.
struct TestFunction {
  NodeId node{0};
  std::string name;
  std::function<double(PathView)> evaluate;
  std::optional<double> bound;
};

enum class OracleMethod { kEnumeration, kConjugateAnalytic };

/// Exact ground truth for a model.
struct Oracle {
  OracleMethod method{OracleMethod::kEnumeration};
  std::function<double(NodeId)> log_z;
  /// Exact mu_u(phi) for a test function defined at node u.
  std::function<double(const TestFunction&)> expectation;
};

/**
 * \brief Everything the engine needs about a target on a tree.
 *
 * Node geometry (layouts, child slices) is computed at construction; samplers
 * and evaluators are plain members filled in by model factories. Evaluators
 * must be pure functions of their inputs: the engine calls them concurrently.
 */
class ModelSpec {
 public:
  ModelSpec(std::string name, Tree tree, std::vector<NodeSpace> spaces);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const Tree& tree() const noexcept { return tree_; }
  [[nodiscard]] std::span<const NodeSpace> spaces() const noexcept { return spaces_; }
  [[nodiscard]] const PathLayout& layout(NodeId u) const;
  /// Slices of each child subtree inside the concatenated children path of u.
  [[nodiscard]] std::span<const Slice> child_slices(NodeId u) const;

  std::vector<LeafSampler> leaf_proposals;
  std::vector<KernelSampler> kernels;
  std::vector<std::optional<WeightStructure>> aux_weights;
  /// Empty entries mean w_u = 1.
  std::vector<LogWeightFn> target_weights;
  std::vector<TestFunction> test_functions;
  std::shared_ptr<const Oracle> oracle;

 private:
  std::string name_;
  Tree tree_;
  std::vector<NodeSpace> spaces_;
  std::vector<PathLayout> layouts_;
  std::vector<std::vector<Slice>> child_slices_;
};

/**
 * log w_{u-} at a concatenated children path, whatever the declared structure.
 * Throws kStrategyIncompatible for conditional nested weights, which have no
 * pointwise form over the unit children's spaces.
 */
[[nodiscard]] double evaluate_log_weight(const WeightStructure& weight, std::span<const Slice> child_slices,
                                         PathView children_path);

struct Diagnostic {
  enum class Kind {
    kTreeMismatch,
    kMissingSpace,
    kMissingLeafProposal,
    kMissingKernel,
    kMissingAuxWeight,
    kFactorArityMismatch,
    kInvalidPivot,
  };

  Kind kind;
  NodeId node{0};
  std::string message;
};

[[nodiscard]] std::string_view to_string(Diagnostic::Kind kind) noexcept;

/// Structural compatibility of a model with a tree. Empty means runnable.
[[nodiscard]] std::vector<Diagnostic> validate(const Tree& tree, const ModelSpec& model);

}  // namespace dacsmc

#endif  // DACSMC_MODEL_SPEC_HPP
