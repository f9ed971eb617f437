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


#ifndef DACSMC_PARTICLE_HPP
#define DACSMC_PARTICLE_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dacsmc/model_spec.hpp"
#include "dacsmc/rng.hpp"
#include "dacsmc/tree.hpp"

namespace dacsmc {

/// Row-major matrix of flat paths, one row per particle.
class PathMatrix {
 public:
  PathMatrix() = default;
  PathMatrix(std::size_t rows, std::size_t width) : rows_{rows}, width_{width}, data_(rows * width, 0.0) {}

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] PathView row(std::size_t i) const noexcept { return {data_.data() + i * width_, width_}; }
  [[nodiscard]] MutablePathView row(std::size_t i) noexcept { return {data_.data() + i * width_, width_}; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

  bool operator==(const PathMatrix&) const = default;

 private:
  std::size_t rows_{0};
  std::size_t width_{0};
  std::vector<double> data_;
};

/**
 * \brief The output of a run at one node: N paths plus the log of the
 * estimated normalizing constant.
 *
 * An unweighted cloud stands for the equally weighted measure of total mass
 * exp(log_mass). A weighted cloud carries normalized log-weights W, and
 * particle n then has mass exp(log_mass) W^n.
 */
class ParticleCloud {
 public:
  /// `log_weights` may be unnormalized; they are normalized here. Empty means equal weights.
  ParticleCloud(NodeId node, PathMatrix paths, double log_mass, std::vector<double> log_weights = {},
                std::uint64_t rng_stamp = 0);

  [[nodiscard]] NodeId node() const noexcept { return node_; }
  [[nodiscard]] std::size_t size() const noexcept { return paths_.rows(); }
  [[nodiscard]] std::size_t width() const noexcept { return paths_.width(); }
  [[nodiscard]] double log_mass() const noexcept { return log_mass_; }
  [[nodiscard]] const PathMatrix& paths() const noexcept { return paths_; }
  [[nodiscard]] PathView path(std::size_t i) const noexcept { return paths_.row(i); }
  [[nodiscard]] bool is_weighted() const noexcept { return !log_weights_.empty(); }
  /// Normalized log-weight of particle i.
  [[nodiscard]] double log_weight(std::size_t i) const noexcept;
  /// log(N W^i): exactly zero for an unweighted cloud.
  [[nodiscard]] double log_scaled_weight(std::size_t i) const noexcept {
    return log_weights_.empty() ? 0.0 : log_weights_[i] + log_size_;
  }
  /// Normalized log-weights, materialized for unweighted clouds too.
  [[nodiscard]] std::vector<double> log_weights() const;
  [[nodiscard]] std::uint64_t rng_stamp() const noexcept { return rng_stamp_; }

 private:
  NodeId node_;
  PathMatrix paths_;
  double log_mass_;
  std::vector<double> log_weights_;
  double log_size_;
  std::uint64_t rng_stamp_;
};

using CloudPtr = std::shared_ptr<const ParticleCloud>;

/**
 * \brief The weighted measure gamma_{u-}^N before resampling, kept lazily as
 * index tuples into the children clouds.
 *
 * Atom k is the concatenation of rows index(k, j) of source j. Its mass is
 * exp(log_prefactor + log_weight(k)) / size().
 */
class WeightedAtoms {
 public:
  WeightedAtoms(std::vector<CloudPtr> sources, std::vector<std::uint32_t> index_tuples, std::vector<double> log_weights,
                double log_prefactor);

  [[nodiscard]] std::size_t size() const noexcept { return log_weights_.size(); }
  [[nodiscard]] std::size_t arity() const noexcept { return sources_.size(); }
  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] std::span<const double> log_weights() const noexcept { return log_weights_; }
  [[nodiscard]] double log_prefactor() const noexcept { return log_prefactor_; }
  /// Log of the total mass: log_prefactor + log_mean_exp(log_weights).
  [[nodiscard]] double log_mass() const noexcept { return log_mass_; }
  [[nodiscard]] std::span<const std::uint32_t> indices(std::size_t k) const noexcept {
    return {tuples_.data() + k * sources_.size(), sources_.size()};
  }
  [[nodiscard]] std::span<const CloudPtr> sources() const noexcept { return sources_; }
  /// Writes atom k into `out`, which must have width() entries.
  void materialize(std::size_t k, MutablePathView out) const;
  /// Rows `picks` of the atoms, concatenated into a matrix.
  [[nodiscard]] PathMatrix materialize_rows(std::span<const std::size_t> picks) const;

 private:
  std::vector<CloudPtr> sources_;
  std::vector<std::uint32_t> tuples_;
  std::vector<double> log_weights_;
  double log_prefactor_;
  double log_mass_;
  std::size_t width_{0};
};

/// Draws n i.i.d. paths from the leaf proposal of u; the cloud has mass one.
[[nodiscard]] ParticleCloud leaf_init(const ModelSpec& model, NodeId u, std::size_t n, RngStream& rng);

/**
 * Extends each children path with a draw from K_u. The input rows are
 * children paths of u; the output rows are full subtree paths of u.
 */
[[nodiscard]] ParticleCloud mutate(const PathMatrix& children_paths, const ModelSpec& model, NodeId u, double log_mass,
                                   RngStream& rng, std::vector<double> log_weights = {});

struct TargetEstimates {
  double log_z{0.0};
  /// rho_u^N(phi) for each test function, in input order.
  std::vector<double> rho;
  /// mu_u^N(phi) for each test function, in input order.
  std::vector<double> mu;
};

/**
 * Applies the target weight w_u to a cloud at u and integrates the test
 * functions. Test functions with a bound are checked against it.
 */
[[nodiscard]] TargetEstimates target_estimates(const ParticleCloud& cloud, const ModelSpec& model,
                                               std::span<const TestFunction> tests);

/// (sum w)^2 / sum w^2 from log-weights; zero for an empty span.
[[nodiscard]] double effective_sample_size(std::span<const double> log_weights) noexcept;

/// Throws kNonFiniteWeight unless x is finite.
void check_log_weight(double x, NodeId node, const char* what);

}  // namespace dacsmc

#endif  // DACSMC_PARTICLE_HPP
