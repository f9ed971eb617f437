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


#ifndef DACSMC_RESAMPLING_HPP
#define DACSMC_RESAMPLING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "dacsmc/model_spec.hpp"
#include "dacsmc/particle.hpp"
#include "dacsmc/rng.hpp"

namespace dacsmc {

/// Walker/Vose alias table over log-weights: O(n) to build, O(1) per draw.
class CategoricalSampler {
 public:
  /// Throws kNonFiniteWeight for NaN or +inf entries and kAllZeroWeights when every entry is -inf.
  explicit CategoricalSampler(std::span<const double> log_weights);

  [[nodiscard]] std::size_t size() const noexcept { return probability_.size(); }
  [[nodiscard]] double probability(std::size_t i) const noexcept { return probability_[i]; }
  std::size_t sample(RngStream& rng) const noexcept;

 private:
  std::vector<double> probability_;
  std::vector<double> threshold_;
  std::vector<std::uint32_t> alias_;
};

/// n i.i.d. categorical draws.
[[nodiscard]] std::vector<std::size_t> multinomial_indices(std::span<const double> log_weights, std::size_t n,
                                                           RngStream& rng);

/// A set of index tuples into `arity` children clouds, each index below n.
struct IndexSet {
  std::size_t n{0};
  std::size_t arity{0};
  std::vector<std::uint32_t> entries;

  [[nodiscard]] std::size_t size() const noexcept { return arity == 0 ? 0 : entries.size() / arity; }
  [[nodiscard]] std::span<const std::uint32_t> tuple(std::size_t k) const noexcept {
    return {entries.data() + k * arity, arity};
  }
};

/**
 * Blocks of n tuples, block b holding ((k + offsets[b][v]) mod n)_v for k < n.
 * Every block visits each particle of each child exactly once.
 */
[[nodiscard]] IndexSet cyclic_index_set(std::size_t n, std::span<const std::vector<std::size_t>> block_offsets);

/// The single block with zero offsets: tuple k is (k, ..., k).
[[nodiscard]] IndexSet diagonal_index_set(std::size_t n, std::size_t arity);

/**
 * `budget` tuples from cyclic blocks with independent uniform offsets; the
 * last block is truncated when budget is not a multiple of n. Offset
 * differences are distinct across blocks while such blocks remain, so
 * tuples do not repeat. Throws kBudgetTooSmall when budget < n.
 */
[[nodiscard]] IndexSet design_index_set(std::size_t n, std::size_t arity, std::size_t budget, RngStream& rng);

/**
 * The product-form measure over all prod_v N_v tuples. Atom weights are
 * w(X^tuple) prod_v N_v W_v, and the prefactor is prod_v Z_v.
 * Throws kMaterializationCapExceeded above `cap` atoms.
 */
[[nodiscard]] WeightedAtoms correct_general(std::span<const CloudPtr> children, const LogWeightFn& log_weight,
                                            NodeId node, std::size_t cap);

/// As correct_general but restricted to the tuples of an index set.
[[nodiscard]] WeightedAtoms correct_incomplete(std::span<const CloudPtr> children, const LogWeightFn& log_weight,
                                               const IndexSet& index_set, NodeId node);

/// n i.i.d. draws from the normalized atoms, materialized.
[[nodiscard]] PathMatrix resample_atoms(const WeightedAtoms& atoms, std::size_t n_out, RngStream& rng);

/// Resampled children paths with the log mass of the product-form measure they were drawn from.
struct Resampled {
  PathMatrix paths;
  double log_mass{0.0};
};

/// Product weight: each child is reweighted and resampled on its own, in O(N) per child.
[[nodiscard]] Resampled resample_factorized(std::span<const CloudPtr> children, std::span<const LogWeightFn> factors,
                                            std::size_t n_out, RngStream& rng, NodeId node);

/// Sum of products: component labels first, then per-child draws within the component.
[[nodiscard]] Resampled resample_mixture(std::span<const CloudPtr> children, const MixtureWeight& weight,
                                         std::size_t n_out, RngStream& rng, NodeId node,
                                         std::vector<std::size_t>* component_counts = nullptr);

/**
 * Probability of each index tuple (last child fastest) under the tables that
 * resample_factorized and resample_mixture draw from. For exact comparisons
 * with the generic atom law on small clouds.
 */
[[nodiscard]] std::vector<double> factorized_tuple_law(std::span<const CloudPtr> children,
                                                       std::span<const LogWeightFn> factors, NodeId node);
[[nodiscard]] std::vector<double> mixture_tuple_law(std::span<const CloudPtr> children, const MixtureWeight& weight,
                                                    NodeId node);

struct NestedOptions {
  /// Reuse the inner tables of an outer index drawn more than once.
  bool cache_inner_tables{true};
};

struct NestedStats {
  std::size_t draws{0};
  std::size_t inner_tables_built{0};
};

/**
 * Pivot plus conditionally factorized units. With an inner weight the cost
 * is O(N^2) evaluations; in conditional mode unit draws are generated lazily
 * per (pivot index, unit, slot) and the cost stays O(N). Unit children clouds
 * may be null in conditional mode.
 */
[[nodiscard]] Resampled resample_nested(std::span<const CloudPtr> children, std::span<const Slice> child_slices,
                                        const NestedWeight& weight, std::size_t n_out, RngStream& rng, NodeId node,
                                        const NestedOptions& options = {}, NestedStats* stats = nullptr);

}  // namespace dacsmc

#endif  // DACSMC_RESAMPLING_HPP
