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

#include "dacsmc/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "dacsmc/error.hpp"
#include "dacsmc/log_math.hpp"

namespace dacsmc {
namespace {

std::string at(NodeId node) { return " at node " + std::to_string(node); }

void require_children(std::span<const CloudPtr> children, NodeId node) {
  require(!children.empty(), ErrorCode::kInvalidArgument, "no children" + at(node));
  for (const auto& c : children) {
    require(c != nullptr, ErrorCode::kInvalidArgument, "missing child cloud" + at(node));
  }
}

double children_log_mass(std::span<const CloudPtr> children) {
  double total = 0.0;
  for (const auto& c : children) {
    total += c->log_mass();
  }
  return total;
}

/// Per-particle log weights log(N W^n) + log f(X^n) of one child.
std::vector<double> child_weights(const ParticleCloud& cloud, const LogWeightFn& factor, NodeId node) {
  std::vector<double> lw(cloud.size());
  for (std::size_t n = 0; n < cloud.size(); ++n) {
    const double f = factor(cloud.path(n));
    check_log_weight(f, node, "auxiliary weight factor");
    lw[n] = cloud.log_scaled_weight(n) + f;
  }
  return lw;
}

void copy_into(PathView src, MutablePathView dst, std::size_t offset) {
  std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(offset));
}

}  // namespace

CategoricalSampler::CategoricalSampler(std::span<const double> log_weights) {
  const std::size_t n = log_weights.size();
  require(n > 0, ErrorCode::kAllZeroWeights, "categorical over an empty set");
  for (const double lw : log_weights) {
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
      throw Error{ErrorCode::kNonFiniteWeight, "categorical log-weight " + std::to_string(lw)};
    }
  }
  const double total = log_sum_exp(log_weights);
  require(std::isfinite(total), ErrorCode::kAllZeroWeights, "every categorical weight is zero");

  probability_.resize(n);
  threshold_.resize(n);
  alias_.resize(n);
  std::vector<std::uint32_t> small;
  std::vector<std::uint32_t> large;
  for (std::size_t i = 0; i < n; ++i) {
    probability_[i] = std::exp(log_weights[i] - total);
    threshold_[i] = probability_[i] * static_cast<double>(n);
    (threshold_[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    alias_[s] = l;
    threshold_[l] -= 1.0 - threshold_[s];
    if (threshold_[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (const auto i : small) {
    threshold_[i] = 1.0;
    alias_[i] = i;
  }
  for (const auto i : large) {
    threshold_[i] = 1.0;
    alias_[i] = i;
  }
}

std::size_t CategoricalSampler::sample(RngStream& rng) const noexcept {
  const auto i = static_cast<std::size_t>(rng.uniform_index(probability_.size()));
  return rng.uniform01() < threshold_[i] ? i : alias_[i];
}

std::vector<std::size_t> multinomial_indices(std::span<const double> log_weights, std::size_t n, RngStream& rng) {
  const CategoricalSampler sampler{log_weights};
  std::vector<std::size_t> out(n);
  for (auto& i : out) {
    i = sampler.sample(rng);
  }
  return out;
}

IndexSet cyclic_index_set(std::size_t n, std::span<const std::vector<std::size_t>> block_offsets) {
  require(n > 0, ErrorCode::kInvalidArgument, "cyclic index set needs n > 0");
  require(!block_offsets.empty(), ErrorCode::kEmptyIndexSet, "cyclic index set needs at least one block");
  IndexSet set{n, block_offsets.front().size(), {}};
  require(set.arity > 0, ErrorCode::kInvalidArgument, "cyclic index set needs arity > 0");
  set.entries.reserve(block_offsets.size() * n * set.arity);
  for (const auto& offsets : block_offsets) {
    require(offsets.size() == set.arity, ErrorCode::kInvalidArgument, "cyclic blocks must share one arity");
    for (std::size_t k = 0; k < n; ++k) {
      for (const std::size_t o : offsets) {
        set.entries.push_back(static_cast<std::uint32_t>((k + o) % n));
      }
    }
  }
  return set;
}

IndexSet diagonal_index_set(std::size_t n, std::size_t arity) {
  const std::vector<std::vector<std::size_t>> zero{std::vector<std::size_t>(arity, 0)};
  return cyclic_index_set(n, zero);
}

IndexSet design_index_set(std::size_t n, std::size_t arity, std::size_t budget, RngStream& rng) {
  require(n > 0 && arity > 0, ErrorCode::kInvalidArgument, "index set needs n > 0 and arity > 0");
  if (budget < n) {
    throw Error{ErrorCode::kBudgetTooSmall,
                "budget " + std::to_string(budget) + " is below the particle count " + std::to_string(n)};
  }
  const std::size_t blocks = (budget + n - 1) / n;

  // Number of distinct offset-difference vectors, saturated.
  std::size_t distinct = 1;
  for (std::size_t v = 1; v < arity && distinct < blocks; ++v) {
    distinct = distinct > std::numeric_limits<std::size_t>::max() / n ? blocks : distinct * n;
  }
  std::set<std::vector<std::size_t>> used;
  std::vector<std::vector<std::size_t>> offsets;
  offsets.reserve(blocks);
  while (offsets.size() < blocks) {
    std::vector<std::size_t> o(arity);
    for (auto& x : o) {
      x = static_cast<std::size_t>(rng.uniform_index(n));
    }
    std::vector<std::size_t> diff(arity - 1);
    for (std::size_t v = 1; v < arity; ++v) {
      diff[v - 1] = (o[v] + n - o[0]) % n;
    }
    if (used.size() < distinct && !used.insert(diff).second) {
      continue;
    }
    offsets.push_back(std::move(o));
  }
  IndexSet set = cyclic_index_set(n, offsets);
  set.entries.resize(budget * arity);
  return set;
}

WeightedAtoms correct_general(std::span<const CloudPtr> children, const LogWeightFn& log_weight, NodeId node,
                              std::size_t cap) {
  require_children(children, node);
  const std::size_t c = children.size();
  std::size_t total = 1;
  std::size_t width = 0;
  for (const auto& ch : children) {
    if (total > cap / ch->size()) {
      throw Error{ErrorCode::kMaterializationCapExceeded,
                  "complete product-form correction exceeds " + std::to_string(cap) + " atoms" + at(node)};
    }
    total *= ch->size();
    width += ch->width();
  }
  std::vector<std::uint32_t> tuples(total * c);
  std::vector<double> lw(total);
  std::vector<std::uint32_t> idx(c, 0);
  std::vector<double> scratch(width);
  for (std::size_t k = 0; k < total; ++k) {
    double x = 0.0;
    std::size_t offset = 0;
    for (std::size_t j = 0; j < c; ++j) {
      tuples[k * c + j] = idx[j];
      x += children[j]->log_scaled_weight(idx[j]);
      copy_into(children[j]->path(idx[j]), scratch, offset);
      offset += children[j]->width();
    }
    const double w = log_weight(scratch);
    check_log_weight(w, node, "auxiliary weight");
    lw[k] = x + w;
    // odometer, last child fastest
    for (std::size_t j = c; j-- > 0;) {
      if (++idx[j] < children[j]->size()) {
        break;
      }
      idx[j] = 0;
    }
  }
  return WeightedAtoms{
      {children.begin(), children.end()}, std::move(tuples), std::move(lw), children_log_mass(children)};
}

WeightedAtoms correct_incomplete(std::span<const CloudPtr> children, const LogWeightFn& log_weight,
                                 const IndexSet& index_set, NodeId node) {
  require_children(children, node);
  const std::size_t c = children.size();
  require(index_set.arity == c, ErrorCode::kInvalidArgument, "index set arity does not match children" + at(node));
  require(index_set.size() > 0, ErrorCode::kEmptyIndexSet, "empty index set" + at(node));
  std::size_t width = 0;
  for (const auto& ch : children) {
    width += ch->width();
  }
  std::vector<double> lw(index_set.size());
  std::vector<double> scratch(width);
  for (std::size_t k = 0; k < index_set.size(); ++k) {
    const auto tuple = index_set.tuple(k);
    double x = 0.0;
    std::size_t offset = 0;
    for (std::size_t j = 0; j < c; ++j) {
      if (tuple[j] >= children[j]->size()) {
        throw Error{ErrorCode::kInvalidArgument, "index " + std::to_string(tuple[j]) + " out of range" + at(node)};
      }
      x += children[j]->log_scaled_weight(tuple[j]);
      copy_into(children[j]->path(tuple[j]), scratch, offset);
      offset += children[j]->width();
    }
    const double w = log_weight(scratch);
    check_log_weight(w, node, "auxiliary weight");
    lw[k] = x + w;
  }
  return WeightedAtoms{
      {children.begin(), children.end()}, index_set.entries, std::move(lw), children_log_mass(children)};
}

PathMatrix resample_atoms(const WeightedAtoms& atoms, std::size_t n_out, RngStream& rng) {
  const auto picks = multinomial_indices(atoms.log_weights(), n_out, rng);
  return atoms.materialize_rows(picks);
}

Resampled resample_factorized(std::span<const CloudPtr> children, std::span<const LogWeightFn> factors,
                              std::size_t n_out, RngStream& rng, NodeId node) {
  require_children(children, node);
  if (factors.size() != children.size()) {
    throw Error{ErrorCode::kInvalidArgument, std::to_string(factors.size()) + " factors for " +
                                                 std::to_string(children.size()) + " children" + at(node)};
  }
  std::size_t width = 0;
  for (const auto& ch : children) {
    width += ch->width();
  }
  Resampled out{PathMatrix{n_out, width}, 0.0};
  std::size_t offset = 0;
  for (std::size_t j = 0; j < children.size(); ++j) {
    const ParticleCloud& child = *children[j];
    const auto lw = child_weights(child, factors[j], node);
    out.log_mass += child.log_mass() + log_mean_exp(lw);
    const CategoricalSampler sampler{lw};
    for (std::size_t i = 0; i < n_out; ++i) {
      copy_into(child.path(sampler.sample(rng)), out.paths.row(i), offset);
    }
    offset += child.width();
  }
  return out;
}

Resampled resample_mixture(std::span<const CloudPtr> children, const MixtureWeight& weight, std::size_t n_out,
                           RngStream& rng, NodeId node, std::vector<std::size_t>* component_counts) {
  require_children(children, node);
  const std::size_t c = children.size();
  const std::size_t components = weight.components.size();
  require(components > 0, ErrorCode::kInvalidArgument, "mixture without components" + at(node));
  std::vector<std::vector<CategoricalSampler>> samplers(components);
  std::vector<double> component_mass(components, 0.0);
  for (std::size_t i = 0; i < components; ++i) {
    require(weight.components[i].size() == c, ErrorCode::kInvalidArgument,
            "mixture component arity does not match children" + at(node));
    for (std::size_t j = 0; j < c; ++j) {
      const auto lw = child_weights(*children[j], weight.components[i][j], node);
      component_mass[i] += log_mean_exp(lw);
      samplers[i].emplace_back(lw);
    }
  }
  std::size_t width = 0;
  for (const auto& ch : children) {
    width += ch->width();
  }
  Resampled out{PathMatrix{n_out, width}, children_log_mass(children) + log_sum_exp(component_mass)};
  // i.i.d. labels give the same multinomial component counts, in exchangeable order.
  const CategoricalSampler label{component_mass};
  if (component_counts != nullptr) {
    component_counts->assign(components, 0);
  }
  for (std::size_t r = 0; r < n_out; ++r) {
    const std::size_t i = label.sample(rng);
    if (component_counts != nullptr) {
      ++(*component_counts)[i];
    }
    std::size_t offset = 0;
    for (std::size_t j = 0; j < c; ++j) {
      copy_into(children[j]->path(samplers[i][j].sample(rng)), out.paths.row(r), offset);
      offset += children[j]->width();
    }
  }
  return out;
}

namespace {

/// Sum over components of prod_v p_{i,v}(n_v), enumerated with the last child fastest.
std::vector<double> tuple_law(std::span<const CloudPtr> children, const std::vector<double>& component_prob,
                              const std::vector<std::vector<CategoricalSampler>>& samplers) {
  std::size_t total = 1;
  for (const auto& c : children) {
    total *= c->size();
  }
  std::vector<double> law(total, 0.0);
  std::vector<std::size_t> idx(children.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    for (std::size_t i = 0; i < samplers.size(); ++i) {
      double p = component_prob[i];
      for (std::size_t j = 0; j < children.size(); ++j) {
        p *= samplers[i][j].probability(idx[j]);
      }
      law[k] += p;
    }
    for (std::size_t j = children.size(); j-- > 0;) {
      if (++idx[j] < children[j]->size()) {
        break;
      }
      idx[j] = 0;
    }
  }
  return law;
}

}  // namespace

std::vector<double> factorized_tuple_law(std::span<const CloudPtr> children, std::span<const LogWeightFn> factors,
                                         NodeId node) {
  require_children(children, node);
  std::vector<std::vector<CategoricalSampler>> samplers(1);
  for (std::size_t j = 0; j < children.size(); ++j) {
    samplers[0].emplace_back(child_weights(*children[j], factors[j], node));
  }
  return tuple_law(children, {1.0}, samplers);
}

std::vector<double> mixture_tuple_law(std::span<const CloudPtr> children, const MixtureWeight& weight, NodeId node) {
  require_children(children, node);
  std::vector<std::vector<CategoricalSampler>> samplers(weight.components.size());
  std::vector<double> component_mass(weight.components.size(), 0.0);
  for (std::size_t i = 0; i < weight.components.size(); ++i) {
    for (std::size_t j = 0; j < children.size(); ++j) {
      const auto lw = child_weights(*children[j], weight.components[i][j], node);
      component_mass[i] += log_mean_exp(lw);
      samplers[i].emplace_back(lw);
    }
  }
  const CategoricalSampler label{component_mass};
  std::vector<double> prob(component_mass.size());
  for (std::size_t i = 0; i < prob.size(); ++i) {
    prob[i] = label.probability(i);
  }
  return tuple_law(children, prob, samplers);
}

Resampled resample_nested(std::span<const CloudPtr> children, std::span<const Slice> child_slices,
                          const NestedWeight& weight, std::size_t n_out, RngStream& rng, NodeId node,
                          const NestedOptions& options, NestedStats* stats) {
  const std::size_t c = children.size();
  require(c == child_slices.size() && weight.pivot < c, ErrorCode::kInvalidArgument,
          "nested weight does not match the children" + at(node));
  require(children[weight.pivot] != nullptr, ErrorCode::kInvalidArgument, "missing pivot cloud" + at(node));
  const ParticleCloud& pivot = *children[weight.pivot];
  const bool conditional = weight.conditional();
  std::vector<std::size_t> unit_pos;
  for (std::size_t j = 0; j < c; ++j) {
    if (j != weight.pivot) {
      unit_pos.push_back(j);
      require(conditional || children[j] != nullptr, ErrorCode::kInvalidArgument, "missing unit cloud" + at(node));
    }
  }
  const std::size_t units = unit_pos.size();
  const std::size_t width = child_slices.empty() ? 0 : child_slices.back().offset + child_slices.back().width;
  const std::size_t np = pivot.size();

  // Unit tables for one pivot index: log W_l^k + inner(pivot, l, X_l^k).
  auto inner_weights = [&](std::size_t m, std::size_t l) {
    const ParticleCloud& unit = *children[unit_pos[l]];
    std::vector<double> lw(unit.size());
    for (std::size_t k = 0; k < unit.size(); ++k) {
      const double f = weight.inner(pivot.path(m), l, unit.path(k));
      check_log_weight(f, node, "inner weight");
      lw[k] = unit.log_weight(k) + f;
    }
    return lw;
  };

  std::vector<double> outer(np);
  double log_mass = pivot.log_mass();
  for (std::size_t m = 0; m < np; ++m) {
    double x = pivot.log_scaled_weight(m);
    if (weight.outer) {
      const double f = weight.outer(pivot.path(m));
      check_log_weight(f, node, "outer weight");
      x += f;
    }
    if (!conditional) {
      for (std::size_t l = 0; l < units; ++l) {
        x += log_sum_exp(inner_weights(m, l));
      }
    }
    outer[m] = x;
  }
  if (!conditional) {
    for (const std::size_t j : unit_pos) {
      log_mass += children[j]->log_mass();
    }
  }
  log_mass += log_mean_exp(outer);

  Resampled out{PathMatrix{n_out, width}, log_mass};
  const CategoricalSampler pick_pivot{outer};
  const Slice ps = child_slices[weight.pivot];
  std::unordered_map<std::size_t, std::vector<CategoricalSampler>> tables;
  // Conditional draws keyed by (m * units + l) * np + k.
  std::unordered_map<std::size_t, std::vector<double>> draws;
  RngStream unit_rng = rng.derive(node, StreamPurpose::kResample, 1);

  for (std::size_t r = 0; r < n_out; ++r) {
    const std::size_t m = pick_pivot.sample(rng);
    MutablePathView row = out.paths.row(r);
    copy_into(pivot.path(m), row, ps.offset);
    if (stats != nullptr) {
      ++stats->draws;
    }
    if (conditional) {
      for (std::size_t l = 0; l < units; ++l) {
        const std::size_t k = static_cast<std::size_t>(rng.uniform_index(np));
        const std::size_t key = (m * units + l) * np + k;
        auto it = draws.find(key);
        const Slice us = child_slices[unit_pos[l]];
        if (it == draws.end()) {
          std::vector<double> x(us.width);
          weight.conditional_unit(pivot.path(m), l, unit_rng, x);
          for (const double v : x) {
            require(std::isfinite(v), ErrorCode::kSamplerFailure, "conditional unit draw is not finite" + at(node));
          }
          it = draws.emplace(key, std::move(x)).first;
        }
        copy_into(it->second, row, us.offset);
      }
      continue;
    }
    auto it = options.cache_inner_tables ? tables.find(m) : tables.end();
    if (it == tables.end()) {
      std::vector<CategoricalSampler> built;
      built.reserve(units);
      for (std::size_t l = 0; l < units; ++l) {
        built.emplace_back(inner_weights(m, l));
      }
      if (stats != nullptr) {
        ++stats->inner_tables_built;
      }
      tables.erase(m);
      it = tables.emplace(m, std::move(built)).first;
    }
    for (std::size_t l = 0; l < units; ++l) {
      const std::size_t k = it->second[l].sample(rng);
      copy_into(children[unit_pos[l]]->path(k), row, child_slices[unit_pos[l]].offset);
    }
  }
  return out;
}

}  // namespace dacsmc
