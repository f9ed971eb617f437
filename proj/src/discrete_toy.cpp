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


#include <cmath>
#include <memory>

#include "dacsmc/error.hpp"
#include "dacsmc/models.hpp"

namespace dacsmc {
namespace {

constexpr std::size_t kMaxConfigurations = 1'000'000;
constexpr std::size_t kMixtureComponents = 2;

std::size_t own_value(PathView path) { return static_cast<std::size_t>(path.back()); }

std::size_t draw_categorical(const std::vector<double>& probs, std::size_t offset, std::size_t count,
                             RngStream& rng) {
  double u = rng.uniform01();
  for (std::size_t i = 0; i + 1 < count; ++i) {
    u -= probs[offset + i];
    if (u < 0) {
      return i;
    }
  }
  return count - 1;
}

/// Base-alphabet code of the children's own values, first child most significant.
std::size_t children_code(PathView children_path, std::span<const Slice> slices, std::size_t alphabet) {
  std::size_t code = 0;
  for (const Slice& s : slices) {
    code = code * alphabet + static_cast<std::size_t>(children_path[s.offset + s.width - 1]);
  }
  return code;
}

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    r *= base;
  }
  return r;
}

}  // namespace

DiscreteToyTables discrete_toy_tables(const DiscreteToyConfig& config) {
  require(config.depth >= 1 && config.branching >= 1 && config.alphabet >= 2, ErrorCode::kInvalidArgument,
          "discrete toy needs depth >= 1, branching >= 1 and alphabet >= 2");
  require(config.spread >= 0 && std::isfinite(config.spread), ErrorCode::kInvalidArgument,
          "discrete toy spread must be finite and non-negative");
  std::size_t nodes = 0;
  std::size_t level = 1;
  for (std::size_t d = 0; d <= config.depth; ++d) {
    nodes += level;
    level *= config.branching;
    require(nodes <= 64, ErrorCode::kTooLarge, "discrete toy has too many nodes");
  }
  double configurations = std::pow(static_cast<double>(config.alphabet), static_cast<double>(nodes));
  require(configurations <= static_cast<double>(kMaxConfigurations), ErrorCode::kTooLarge,
          "discrete toy has " + std::to_string(configurations) + " configurations, above 10^6");

  std::vector<std::optional<NodeId>> parents(nodes);
  for (std::size_t k = 1; k < nodes; ++k) {
    parents[k] = static_cast<NodeId>((k - 1) / config.branching);
  }
  DiscreteToyTables t;
  t.alphabet = config.alphabet;
  t.tree = build_tree(parents);
  t.structure = config.structure;
  const std::size_t a = config.alphabet;
  t.leaf_proposal.resize(nodes);
  t.kernel.resize(nodes);
  t.aux.resize(nodes);
  t.factor.resize(nodes);
  t.mixture.resize(nodes);
  t.target.resize(nodes);

  for (NodeId u = 0; u < nodes; ++u) {
    RngStream rng{config.seed, 0, u, StreamPurpose::kUser};
    const auto weight = [&] { return config.uniform ? 1.0 : std::exp(config.spread * (2.0 * rng.uniform01() - 1.0)); };
    const auto distribution = [&](std::size_t count) {
      std::vector<double> p(count);
      double total = 0.0;
      for (auto& x : p) {
        x = weight();
        total += x;
      }
      for (auto& x : p) {
        x /= total;
      }
      return p;
    };

    t.target[u].resize(a);
    for (auto& x : t.target[u]) {
      x = weight();
    }
    const std::size_t c = t.tree.children(u).size();
    if (c == 0) {
      t.leaf_proposal[u] = distribution(a);
      continue;
    }
    const std::size_t codes = ipow(a, c);
    for (std::size_t code = 0; code < codes; ++code) {
      const auto p = distribution(a);
      t.kernel[u].insert(t.kernel[u].end(), p.begin(), p.end());
    }
    switch (config.structure) {
      case ToyStructure::kGeneral:
        t.aux[u].resize(codes);
        for (auto& x : t.aux[u]) {
          x = weight();
        }
        break;
      case ToyStructure::kFactorized:
        t.factor[u].assign(c, std::vector<double>(a));
        for (auto& f : t.factor[u]) {
          for (auto& x : f) {
            x = weight();
          }
        }
        break;
      case ToyStructure::kMixture:
        t.mixture[u].assign(kMixtureComponents, std::vector<std::vector<double>>(c, std::vector<double>(a)));
        for (auto& component : t.mixture[u]) {
          for (auto& f : component) {
            for (auto& x : f) {
              // With uniform tables the components sum to one.
              x = config.uniform ? (&f == &component.front() ? 1.0 / kMixtureComponents : 1.0) : weight();
            }
          }
        }
        break;
    }
  }
  return t;
}

namespace {

/// log of the local factor of node v in gamma_u for a configuration laid out as a subtree path.
double local_log_factor(const DiscreteToyTables& t, const ModelSpec& model, NodeId v, PathView subtree_path) {
  const std::size_t a = t.alphabet;
  const std::size_t xv = own_value(subtree_path);
  if (t.tree.is_leaf(v)) {
    return std::log(t.leaf_proposal[v][xv]);
  }
  const auto slices = model.child_slices(v);
  const PathView children = subtree_path.first(subtree_path.size() - 1);
  const std::size_t code = children_code(children, slices, a);
  double log_aux = 0.0;
  switch (t.structure) {
    case ToyStructure::kGeneral:
      log_aux = std::log(t.aux[v][code]);
      break;
    case ToyStructure::kFactorized:
      for (std::size_t j = 0; j < slices.size(); ++j) {
        log_aux += std::log(t.factor[v][j][static_cast<std::size_t>(children[slices[j].offset + slices[j].width - 1])]);
      }
      break;
    case ToyStructure::kMixture: {
      double total = 0.0;
      for (const auto& component : t.mixture[v]) {
        double prod = 1.0;
        for (std::size_t j = 0; j < slices.size(); ++j) {
          prod *= component[j][static_cast<std::size_t>(children[slices[j].offset + slices[j].width - 1])];
        }
        total += prod;
      }
      log_aux = std::log(total);
      break;
    }
  }
  return log_aux + std::log(t.kernel[v][code * a + xv]);
}

/// Enumerates every configuration of the subtree of u and calls f(path, log unnormalized rho_u).
template <class F>
void enumerate_subtree(const DiscreteToyTables& t, const ModelSpec& model, NodeId u, F&& f) {
  const PathLayout& layout = model.layout(u);
  const std::size_t width = layout.total_width();
  std::vector<double> path(width, 0.0);
  const std::size_t total = ipow(t.alphabet, width);
  for (std::size_t k = 0; k < total; ++k) {
    double log_rho = std::log(t.target[u][own_value(path)]);
    for (const auto& [v, s] : layout.slices()) {
      // The subtree path of v ends at its own slice.
      const std::size_t sub_width = model.layout(v).total_width();
      const std::size_t start = s.offset + s.width - sub_width;
      log_rho += local_log_factor(t, model, v, PathView{path}.subspan(start, sub_width));
    }
    f(PathView{path}, log_rho);
    for (std::size_t i = 0; i < width; ++i) {
      if (++path[i] < static_cast<double>(t.alphabet)) {
        break;
      }
      path[i] = 0.0;
    }
  }
}

}  // namespace

ModelSpec discrete_toy(const DiscreteToyConfig& config) {
  auto tables = std::make_shared<const DiscreteToyTables>(discrete_toy_tables(config));
  const Tree& tree = tables->tree;
  const std::size_t a = tables->alphabet;
  std::vector<NodeSpace> spaces(tree.size(), NodeSpace::finite(a));
  ModelSpec model{"discrete_toy", tree, std::move(spaces)};

  for (NodeId u = 0; u < tree.size(); ++u) {
    model.target_weights[u] = [tables, u](PathView p) { return std::log(tables->target[u][own_value(p)]); };
    if (tree.is_leaf(u)) {
      model.leaf_proposals[u] = [tables, u, a](RngStream& rng, MutablePathView own) {
        own[0] = static_cast<double>(draw_categorical(tables->leaf_proposal[u], 0, a, rng));
      };
      continue;
    }
    const std::vector<Slice> slices{model.child_slices(u).begin(), model.child_slices(u).end()};
    model.kernels[u] = [tables, u, a, slices](PathView children, RngStream& rng, MutablePathView own) {
      const std::size_t code = children_code(children, slices, a);
      own[0] = static_cast<double>(draw_categorical(tables->kernel[u], code * a, a, rng));
    };
    const std::size_t c = slices.size();
    switch (config.structure) {
      case ToyStructure::kGeneral:
        model.aux_weights[u] = GeneralWeight{[tables, u, a, slices](PathView p) {
          return std::log(tables->aux[u][children_code(p, slices, a)]);
        }};
        break;
      case ToyStructure::kFactorized: {
        FactorizedWeight w;
        for (std::size_t j = 0; j < c; ++j) {
          w.factors.push_back([tables, u, j](PathView p) { return std::log(tables->factor[u][j][own_value(p)]); });
        }
        model.aux_weights[u] = std::move(w);
        break;
      }
      case ToyStructure::kMixture: {
        MixtureWeight w;
        for (std::size_t i = 0; i < kMixtureComponents; ++i) {
          std::vector<LogWeightFn> component;
          for (std::size_t j = 0; j < c; ++j) {
            component.push_back(
                [tables, u, i, j](PathView p) { return std::log(tables->mixture[u][i][j][own_value(p)]); });
          }
          w.components.push_back(std::move(component));
        }
        model.aux_weights[u] = std::move(w);
        break;
      }
    }
  }

  const NodeId root = tree.root();
  model.test_functions.push_back(
      TestFunction{root, "root_is_zero", [](PathView p) { return p.back() == 0.0 ? 1.0 : 0.0; }, 1.0});
  model.test_functions.push_back(
      TestFunction{root, "root_value", [](PathView p) { return p.back(); }, static_cast<double>(a - 1)});

  // The oracle holds its own copy of the geometry so it outlives the returned spec's moves.
  auto geometry = std::make_shared<const ModelSpec>(model);
  auto oracle = std::make_shared<Oracle>();
  oracle->method = OracleMethod::kEnumeration;
  oracle->log_z = [tables, geometry](NodeId u) {
    std::vector<double> terms;
    enumerate_subtree(*tables, *geometry, u, [&](PathView, double lr) { terms.push_back(lr); });
    double shift = terms.front();
    for (const double x : terms) {
      shift = std::max(shift, x);
    }
    double total = 0.0;
    for (const double x : terms) {
      total += std::exp(x - shift);
    }
    return shift + std::log(total);
  };
  oracle->expectation = [tables, geometry](const TestFunction& f) {
    double num = 0.0;
    double den = 0.0;
    enumerate_subtree(*tables, *geometry, f.node, [&](PathView p, double lr) {
      const double w = std::exp(lr);
      num += w * f.evaluate(p);
      den += w;
    });
    return num / den;
  };
  model.oracle = std::move(oracle);
  return model;
}

}  // namespace dacsmc
