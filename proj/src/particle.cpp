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

#include "dacsmc/particle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dacsmc/error.hpp"
#include "dacsmc/log_math.hpp"

namespace dacsmc {
namespace {

void check_draw(const ModelSpec& model, NodeId u, PathView own) {
  const NodeSpace& space = model.spaces()[u];
  for (const double x : own) {
    if (!std::isfinite(x)) {
      throw Error{ErrorCode::kSamplerFailure, "sampler at node " + std::to_string(u) + " produced a non-finite value"};
    }
    if (space.kind == NodeSpace::Kind::kFinite) {
      if (!(x >= 0 && x < static_cast<double>(space.size) && std::floor(x) == x)) {
        throw Error{ErrorCode::kSamplerFailure, "sampler at node " + std::to_string(u) + " produced " +
                                                    std::to_string(x) + " outside its alphabet"};
      }
    }
  }
}

template <class F>
void guarded(NodeId u, F&& f) {
  try {
    f();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error{ErrorCode::kSamplerFailure, "sampler at node " + std::to_string(u) + " failed: " + e.what()};
  }
}

}  // namespace

void check_log_weight(double x, NodeId node, const char* what) {
  if (!std::isfinite(x)) {
    throw Error{ErrorCode::kNonFiniteWeight,
                std::string{what} + " at node " + std::to_string(node) + " has log value " + std::to_string(x)};
  }
}

ParticleCloud::ParticleCloud(NodeId node, PathMatrix paths, double log_mass, std::vector<double> log_weights,
                             std::uint64_t rng_stamp)
    : node_{node},
      paths_{std::move(paths)},
      log_mass_{log_mass},
      log_weights_{std::move(log_weights)},
      log_size_{std::log(static_cast<double>(paths_.rows()))},
      rng_stamp_{rng_stamp} {
  require(paths_.rows() > 0, ErrorCode::kInvalidArgument, "a particle cloud needs at least one particle");
  require(!std::isnan(log_mass_), ErrorCode::kNonFiniteWeight, "particle cloud mass is NaN");
  if (log_weights_.empty()) {
    return;
  }
  if (log_weights_.size() != paths_.rows()) {
    throw Error{ErrorCode::kInvalidArgument, "particle cloud has " + std::to_string(log_weights_.size()) +
                                                 " weights for " + std::to_string(paths_.rows()) + " paths"};
  }
  for (const double lw : log_weights_) {
    check_log_weight(lw, node_, "particle weight");
  }
  const double total = log_sum_exp(log_weights_);
  for (double& lw : log_weights_) {
    lw -= total;
  }
}

double ParticleCloud::log_weight(std::size_t i) const noexcept {
  return log_weights_.empty() ? -log_size_ : log_weights_[i];
}

std::vector<double> ParticleCloud::log_weights() const {
  if (log_weights_.empty()) {
    return std::vector<double>(size(), -log_size_);
  }
  return log_weights_;
}

WeightedAtoms::WeightedAtoms(std::vector<CloudPtr> sources, std::vector<std::uint32_t> index_tuples,
                             std::vector<double> log_weights, double log_prefactor)
    : sources_{std::move(sources)},
      tuples_{std::move(index_tuples)},
      log_weights_{std::move(log_weights)},
      log_prefactor_{log_prefactor} {
  require(!log_weights_.empty(), ErrorCode::kEmptyIndexSet, "weighted atoms need at least one atom");
  require(tuples_.size() == log_weights_.size() * sources_.size(), ErrorCode::kInvalidArgument,
          "index tuples do not match the atom count");
  for (const auto& s : sources_) {
    width_ += s->width();
  }
  log_mass_ = log_prefactor_ + log_mean_exp(log_weights_);
}

void WeightedAtoms::materialize(std::size_t k, MutablePathView out) const {
  auto idx = indices(k);
  std::size_t offset = 0;
  for (std::size_t j = 0; j < sources_.size(); ++j) {
    const PathView row = sources_[j]->path(idx[j]);
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += row.size();
  }
}

PathMatrix WeightedAtoms::materialize_rows(std::span<const std::size_t> picks) const {
  PathMatrix out{picks.size(), width_};
  for (std::size_t i = 0; i < picks.size(); ++i) {
    materialize(picks[i], out.row(i));
  }
  return out;
}

ParticleCloud leaf_init(const ModelSpec& model, NodeId u, std::size_t n, RngStream& rng) {
  require(n > 0, ErrorCode::kInvalidArgument, "particle count must be positive");
  if (!model.tree().is_leaf(u)) {
    throw Error{ErrorCode::kInvalidNode, "node " + std::to_string(u) + " is not a leaf"};
  }
  const auto& sampler = model.leaf_proposals[u];
  if (!static_cast<bool>(sampler)) {
    throw Error{ErrorCode::kSamplerFailure, "leaf " + std::to_string(u) + " has no proposal"};
  }
  PathMatrix paths{n, model.layout(u).total_width()};
  guarded(u, [&] {
    for (std::size_t i = 0; i < n; ++i) {
      sampler(rng, paths.row(i));
      check_draw(model, u, paths.row(i));
    }
  });
  return ParticleCloud{u, std::move(paths), 0.0, {}, rng.stamp()};
}

ParticleCloud mutate(const PathMatrix& children_paths, const ModelSpec& model, NodeId u, double log_mass,
                     RngStream& rng, std::vector<double> log_weights) {
  const PathLayout& layout = model.layout(u);
  if (children_paths.width() != layout.children_width()) {
    throw Error{ErrorCode::kInvalidArgument, "children paths have width " + std::to_string(children_paths.width()) +
                                                 ", node " + std::to_string(u) + " expects " +
                                                 std::to_string(layout.children_width())};
  }
  const auto& kernel = model.kernels[u];
  if (!static_cast<bool>(kernel)) {
    throw Error{ErrorCode::kSamplerFailure, "node " + std::to_string(u) + " has no kernel"};
  }
  const std::size_t cw = layout.children_width();
  PathMatrix paths{children_paths.rows(), layout.total_width()};
  guarded(u, [&] {
    for (std::size_t i = 0; i < paths.rows(); ++i) {
      const PathView in = children_paths.row(i);
      MutablePathView out = paths.row(i);
      std::copy(in.begin(), in.end(), out.begin());
      const MutablePathView own = out.subspan(cw);
      kernel(out.first(cw), rng, own);
      check_draw(model, u, own);
    }
  });
  return ParticleCloud{u, std::move(paths), log_mass, std::move(log_weights), rng.stamp()};
}

TargetEstimates target_estimates(const ParticleCloud& cloud, const ModelSpec& model,
                                 std::span<const TestFunction> tests) {
  const NodeId u = cloud.node();
  const auto& w = model.target_weights.at(u);
  const std::size_t n = cloud.size();
  std::vector<double> lw(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = cloud.log_scaled_weight(i);
    if (w) {
      const double t = w(cloud.path(i));
      check_log_weight(t, u, "target weight");
      x += t;
    }
    lw[i] = x;
  }
  TargetEstimates out;
  out.log_z = cloud.log_mass() + log_mean_exp(lw);
  const double shift = *std::max_element(lw.begin(), lw.end());
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::exp(lw[i] - shift);
  }
  const double denom = pairwise_sum(p);
  std::vector<double> terms(n);
  for (const TestFunction& f : tests) {
    if (f.node != u) {
      throw Error{ErrorCode::kInvalidArgument, "test function '" + f.name + "' belongs to node " +
                                                   std::to_string(f.node) + ", not " + std::to_string(u)};
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double v = f.evaluate(cloud.path(i));
      if (!(std::isfinite(v) && (!f.bound || std::abs(v) <= *f.bound))) {
        throw Error{ErrorCode::kInvalidArgument,
                    "test function '" + f.name + "' returned " + std::to_string(v) + " outside its bound"};
      }
      terms[i] = p[i] * v;
    }
    const double mu = pairwise_sum(terms) / denom;
    out.mu.push_back(mu);
    out.rho.push_back(std::exp(out.log_z) * mu);
  }
  return out;
}

double effective_sample_size(std::span<const double> log_weights) noexcept {
  if (log_weights.empty()) {
    return 0.0;
  }
  std::vector<double> doubled(log_weights.begin(), log_weights.end());
  for (double& x : doubled) {
    x *= 2.0;
  }
  return std::exp(2.0 * log_sum_exp(log_weights) - log_sum_exp(doubled));
}

}  // namespace dacsmc
