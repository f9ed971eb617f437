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


#include "dacsmc/engine.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "dacsmc/error.hpp"
#include "dacsmc/log_math.hpp"

namespace dacsmc {

Strategy Strategy::parse(std::string_view text) {
  Strategy s;
  if (text == "auto") {
    s.kind = Kind::kAuto;
  } else if (text == "generic") {
    s.kind = Kind::kGeneric;
  } else if (text == "factorized") {
    s.kind = Kind::kFactorized;
  } else if (text == "mixture") {
    s.kind = Kind::kMixture;
  } else if (text == "nested") {
    s.kind = Kind::kNested;
  } else if (text.starts_with("incomplete:")) {
    s.kind = Kind::kIncomplete;
    const auto arg = text.substr(11);
    if (arg == "diag") {
      s.diagonal = true;
    } else {
      const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), s.budget);
      require(ec == std::errc{} && ptr == arg.data() + arg.size() && s.budget > 0, ErrorCode::kInvalidArgument,
              "bad incomplete budget '" + std::string{arg} + "'");
    }
  } else {
    throw Error{ErrorCode::kInvalidArgument, "unknown strategy '" + std::string{text} + "'"};
  }
  return s;
}

std::string Strategy::to_string() const {
  switch (kind) {
    case Kind::kAuto: return "auto";
    case Kind::kGeneric: return "generic";
    case Kind::kFactorized: return "factorized";
    case Kind::kMixture: return "mixture";
    case Kind::kNested: return "nested";
    case Kind::kIncomplete: return diagonal ? "incomplete:diag" : "incomplete:" + std::to_string(budget);
  }
  return "auto";
}

void TraceSink::record(TraceRecord r) {
  const std::lock_guard lock{mutex_};
  records_.push_back(std::move(r));
}

std::vector<TraceRecord> TraceSink::records() const {
  std::vector<TraceRecord> out;
  {
    const std::lock_guard lock{mutex_};
    out = records_;
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
  return out;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const NestedWeight* as_conditional(const WeightStructure& aux) {
  const auto* nested = std::get_if<NestedWeight>(&aux);
  return nested != nullptr && nested->conditional() ? nested : nullptr;
}

/// Concrete strategy for a node, checked against its weight structure.
Strategy resolve(Strategy s, const WeightStructure& aux, NodeId u) {
  const auto incompatible = [&] {
    throw Error{ErrorCode::kStrategyIncompatible, "strategy " + s.to_string() + " does not apply to the " +
                                                      structure_name(aux) + " weight at node " + std::to_string(u)};
  };
  switch (s.kind) {
    case Strategy::Kind::kAuto:
      if (std::holds_alternative<GeneralWeight>(aux)) {
        s.kind = Strategy::Kind::kGeneric;
      } else if (std::holds_alternative<FactorizedWeight>(aux)) {
        s.kind = Strategy::Kind::kFactorized;
      } else if (std::holds_alternative<MixtureWeight>(aux)) {
        s.kind = Strategy::Kind::kMixture;
      } else {
        s.kind = Strategy::Kind::kNested;
      }
      break;
    case Strategy::Kind::kGeneric:
    case Strategy::Kind::kIncomplete:
      if (as_conditional(aux) != nullptr) {
        incompatible();
      }
      break;
    case Strategy::Kind::kFactorized:
      if (!std::holds_alternative<FactorizedWeight>(aux)) {
        incompatible();
      }
      break;
    case Strategy::Kind::kMixture:
      if (!std::holds_alternative<MixtureWeight>(aux) && !std::holds_alternative<FactorizedWeight>(aux)) {
        incompatible();
      }
      break;
    case Strategy::Kind::kNested:
      if (!std::holds_alternative<NestedWeight>(aux)) {
        incompatible();
      }
      break;
  }
  return s;
}

class Runner {
 public:
  Runner(const ModelSpec& model, const EngineOptions& options, bool adaptive, NodeId top)
      : model_{model}, options_{options}, adaptive_{adaptive}, top_{top} {
    const auto problems = validate(model.tree(), model);
    if (!problems.empty()) {
      std::string message = "model '" + model.name() + "' is not runnable:";
      for (const auto& d : problems) {
        message += " [" + std::string{to_string(d.kind)} + "] " + d.message + ";";
      }
      throw Error{ErrorCode::kInvalidArgument, message};
    }
    require(options.node_n.empty() || options.node_n.size() == model.tree().size(), ErrorCode::kInvalidArgument,
            "per-node particle counts must cover every node");
    const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
    thread_budget_ = static_cast<int>(2 * hw);
  }

  CloudPtr run(NodeId u) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = count(u);
    const Tree& tree = model_.tree();
    TraceRecord trace{u, n, "leaf", 0.0, 0.0, kNaN, true, 0.0};

    if (tree.is_leaf(u)) {
      RngStream rng{options_.seed, options_.replicate, u, StreamPurpose::kLeafProposal};
      auto cloud = std::make_shared<const ParticleCloud>(leaf_init(model_, u, n, rng));
      finish(trace, start);
      return cloud;
    }

    const WeightStructure& aux = *model_.aux_weights[u];
    const auto it = options_.node_strategy.find(u);
    const Strategy strategy = resolve(it != options_.node_strategy.end() ? it->second : options_.strategy, aux, u);
    trace.strategy = strategy.to_string();
    const NestedWeight* conditional = as_conditional(aux);

    const auto kids = tree.children(u);
    std::vector<CloudPtr> children(kids.size());
    {
      std::vector<std::pair<std::size_t, std::future<CloudPtr>>> pending;
      for (std::size_t j = 0; j < kids.size(); ++j) {
        if (conditional != nullptr && j != conditional->pivot) {
          continue;
        }
        const bool spawn = options_.parallel_children && j + 1 < kids.size() && live_.fetch_add(1) < thread_budget_;
        if (spawn) {
          pending.emplace_back(j, std::async(std::launch::async, [this, v = kids[j]] {
                                 auto out = run(v);
                                 live_.fetch_sub(1);
                                 return out;
                               }));
        } else {
          if (options_.parallel_children && j + 1 < kids.size()) {
            live_.fetch_sub(1);
          }
          children[j] = run(kids[j]);
        }
      }
      for (auto& [j, f] : pending) {
        children[j] = f.get();
      }
    }
    for (const auto& c : children) {
      if (c) {
        trace.log_children_mass += c->log_mass();
      }
    }

    const auto slices = model_.child_slices(u);
    const LogWeightFn general = [&aux, slices](PathView p) { return evaluate_log_weight(aux, slices, p); };
    RngStream resample_rng{options_.seed, options_.replicate, u, StreamPurpose::kResample};

    PathMatrix paths;
    double log_mass = 0.0;
    std::vector<double> carried;

    const bool gate = adaptive_ && options_.ess_threshold <= 1.0;
    bool skipped = false;
    if (gate || (options_.trace != nullptr && conditional == nullptr)) {
      const std::size_t m = min_count(children);
      const WeightedAtoms diag = correct_incomplete(children, general, diagonal_index_set(m, children.size()), u);
      trace.ess = effective_sample_size(diag.log_weights());
    }
    if (gate) {
      require(conditional == nullptr, ErrorCode::kStrategyIncompatible,
              "adaptive resampling needs a pointwise weight at node " + std::to_string(u));
      for (const auto& c : children) {
        require(c->size() == n, ErrorCode::kStrategyIncompatible,
                "adaptive resampling needs every child of node " + std::to_string(u) + " to carry " +
                    std::to_string(n) + " particles");
      }
      skipped = trace.ess >= options_.ess_threshold * static_cast<double>(n);
    }

    if (skipped) {
      RngStream gate_rng{options_.seed, options_.replicate, u, StreamPurpose::kGate};
      std::vector<std::size_t> offsets(children.size(), 0);
      for (std::size_t j = 1; j < offsets.size(); ++j) {
        offsets[j] = static_cast<std::size_t>(gate_rng.uniform_index(n));
      }
      const std::vector<std::vector<std::size_t>> blocks{offsets};
      const WeightedAtoms atoms = correct_incomplete(children, general, cyclic_index_set(n, blocks), u);
      log_mass = atoms.log_mass();
      if (u == top_) {
        paths = resample_atoms(atoms, n, resample_rng);
      } else {
        std::vector<std::size_t> all(n);
        for (std::size_t k = 0; k < n; ++k) {
          all[k] = k;
        }
        paths = atoms.materialize_rows(all);
        carried.assign(atoms.log_weights().begin(), atoms.log_weights().end());
        trace.resampled = false;
      }
    } else {
      switch (strategy.kind) {
        case Strategy::Kind::kGeneric: {
          const WeightedAtoms atoms = correct_general(children, general, u, options_.materialization_cap);
          log_mass = atoms.log_mass();
          paths = resample_atoms(atoms, n, resample_rng);
          break;
        }
        case Strategy::Kind::kIncomplete: {
          const std::size_t m = min_count(children);
          RngStream design_rng{options_.seed, options_.replicate, u, StreamPurpose::kDesign};
          const IndexSet set = strategy.diagonal ? diagonal_index_set(m, children.size())
                                                 : design_index_set(m, children.size(), strategy.budget, design_rng);
          const WeightedAtoms atoms = correct_incomplete(children, general, set, u);
          log_mass = atoms.log_mass();
          paths = resample_atoms(atoms, n, resample_rng);
          break;
        }
        case Strategy::Kind::kFactorized: {
          auto r = resample_factorized(children, std::get<FactorizedWeight>(aux).factors, n, resample_rng, u);
          paths = std::move(r.paths);
          log_mass = r.log_mass;
          break;
        }
        case Strategy::Kind::kMixture: {
          const MixtureWeight mixture = std::holds_alternative<MixtureWeight>(aux)
                                            ? std::get<MixtureWeight>(aux)
                                            : MixtureWeight{{std::get<FactorizedWeight>(aux).factors}};
          auto r = resample_mixture(children, mixture, n, resample_rng, u);
          paths = std::move(r.paths);
          log_mass = r.log_mass;
          break;
        }
        case Strategy::Kind::kNested: {
          auto r = resample_nested(children, slices, std::get<NestedWeight>(aux), n, resample_rng, u,
                                   options_.nested);
          paths = std::move(r.paths);
          log_mass = r.log_mass;
          break;
        }
        case Strategy::Kind::kAuto:
          break;
      }
    }

    RngStream mutate_rng{options_.seed, options_.replicate, u, StreamPurpose::kMutate};
    auto cloud = std::make_shared<const ParticleCloud>(
        mutate(paths, model_, u, log_mass, mutate_rng, std::move(carried)));
    trace.log_mass = log_mass;
    finish(trace, start);
    return cloud;
  }

 private:
  std::size_t count(NodeId u) const {
    const std::size_t n = options_.node_n.empty() ? options_.n : options_.node_n[u];
    require(n > 0, ErrorCode::kInvalidArgument, "particle count must be positive at node " + std::to_string(u));
    return n;
  }

  static std::size_t min_count(const std::vector<CloudPtr>& children) {
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (const auto& c : children) {
      if (c) {
        m = std::min(m, c->size());
      }
    }
    return m;
  }

  void finish(TraceRecord& trace, std::chrono::steady_clock::time_point start) const {
    if (options_.trace == nullptr) {
      return;
    }
    trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    options_.trace->record(std::move(trace));
  }

  const ModelSpec& model_;
  const EngineOptions& options_;
  bool adaptive_;
  NodeId top_;
  std::atomic<int> live_{0};
  int thread_budget_{2};
};

}  // namespace

ParticleCloud dac_smc(const ModelSpec& model, NodeId u, const EngineOptions& options) {
  Runner runner{model, options, false, u};
  return *runner.run(u);
}

ParticleCloud dac_smc_adaptive(const ModelSpec& model, NodeId u, const EngineOptions& options) {
  require(!std::isnan(options.ess_threshold) && options.ess_threshold >= 0.0, ErrorCode::kInvalidArgument,
          "ESS threshold must be non-negative");
  Runner runner{model, options, true, u};
  return *runner.run(u);
}

namespace {

struct LumpGeometry {
  LumpedLevels levels;
  /// Line-path position of each original node's own coordinates.
  std::vector<std::size_t> own_offset;
  std::vector<std::size_t> level_offset;
  std::vector<std::size_t> level_width;
  /// gather[u][i]: line-path position of coordinate i of u's original subtree path.
  std::vector<std::vector<std::size_t>> gather;
};

std::shared_ptr<const LumpGeometry> lump_geometry(const ModelSpec& model) {
  auto g = std::make_shared<LumpGeometry>();
  const Tree& tree = model.tree();
  g->levels = lump_levels(tree);
  const std::size_t levels = g->levels.groups.size();
  g->own_offset.resize(tree.size());
  g->level_offset.resize(levels);
  g->level_width.resize(levels);
  std::size_t offset = 0;
  for (std::size_t t = 0; t < levels; ++t) {
    g->level_offset[t] = offset;
    for (const NodeId v : g->levels.groups[t]) {
      g->own_offset[v] = offset;
      offset += model.spaces()[v].width();
    }
    g->level_width[t] = offset - g->level_offset[t];
  }
  g->gather.resize(tree.size());
  for (NodeId u = 0; u < tree.size(); ++u) {
    for (const auto& [v, s] : model.layout(u).slices()) {
      for (std::size_t i = 0; i < s.width; ++i) {
        g->gather[u].push_back(g->own_offset[v] + i);
      }
    }
  }
  return g;
}

void gather_into(PathView line, std::span<const std::size_t> index, std::vector<double>& out) {
  out.resize(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    out[i] = line[index[i]];
  }
}

}  // namespace

std::vector<std::size_t> lumped_to_original(const ModelSpec& model) {
  return lump_geometry(model)->gather[model.tree().root()];
}

ModelSpec lumped_model(const ModelSpec& model) {
  auto g = lump_geometry(model);
  const std::size_t levels = g->levels.groups.size();
  std::vector<NodeSpace> spaces;
  for (std::size_t t = 0; t < levels; ++t) {
    spaces.push_back(NodeSpace::continuous(g->level_width[t]));
  }
  ModelSpec line{model.name() + ":lumped", g->levels.line, std::move(spaces)};
  // Shared so the closures outlive this call.
  auto original = std::make_shared<const ModelSpec>(model);
  const NodeId top = static_cast<NodeId>(levels - 1);
  const NodeId root = model.tree().root();

  for (std::size_t t = 0; t < levels; ++t) {
    const auto& group = g->levels.groups[t];
    const std::size_t base = g->level_offset[t];
    if (t == 0) {
      line.leaf_proposals[0] = [original, g, group, base](RngStream& rng, MutablePathView own) {
        for (const NodeId v : group) {
          const std::size_t w = original->spaces()[v].width();
          original->leaf_proposals[v](rng, own.subspan(g->own_offset[v] - base, w));
        }
      };
      continue;
    }
    line.kernels[t] = [original, g, group, base](PathView below, RngStream& rng, MutablePathView own) {
      std::vector<double> scratch;
      for (const NodeId v : group) {
        const std::size_t w = original->spaces()[v].width();
        const MutablePathView out = own.subspan(g->own_offset[v] - base, w);
        if (original->tree().is_leaf(v)) {
          original->leaf_proposals[v](rng, out);
          continue;
        }
        const std::span<const std::size_t> idx{g->gather[v].data(), original->layout(v).children_width()};
        gather_into(below, idx, scratch);
        original->kernels[v](scratch, rng, out);
      }
    };
    line.aux_weights[t] = GeneralWeight{[original, g, group](PathView below) {
      double total = 0.0;
      std::vector<double> scratch;
      for (const NodeId v : group) {
        if (original->tree().is_leaf(v)) {
          continue;
        }
        const std::span<const std::size_t> idx{g->gather[v].data(), original->layout(v).children_width()};
        gather_into(below, idx, scratch);
        total += evaluate_log_weight(*original->aux_weights[v], original->child_slices(v), scratch);
      }
      return total;
    }};
  }

  if (model.target_weights[root]) {
    line.target_weights[top] = [original, g, root](PathView p) {
      std::vector<double> scratch;
      gather_into(p, g->gather[root], scratch);
      return original->target_weights[root](scratch);
    };
  }
  for (const TestFunction& f : model.test_functions) {
    if (f.node != root) {
      continue;
    }
    line.test_functions.push_back(TestFunction{top, f.name,
                                               [g, root, eval = f.evaluate](PathView p) {
                                                 std::vector<double> scratch;
                                                 gather_into(p, g->gather[root], scratch);
                                                 return eval(scratch);
                                               },
                                               f.bound});
  }
  if (model.oracle) {
    auto oracle = std::make_shared<Oracle>();
    oracle->method = model.oracle->method;
    oracle->log_z = [original, top, root](NodeId t) {
      require(t == top, ErrorCode::kNoOracle, "the lumped model only has an oracle at its top node");
      return original->oracle->log_z(root);
    };
    oracle->expectation = [original, root](const TestFunction& f) {
      for (const TestFunction& o : original->test_functions) {
        if (o.node == root && o.name == f.name) {
          return original->oracle->expectation(o);
        }
      }
      throw Error{ErrorCode::kNoOracle, "no original test function named '" + f.name + "'"};
    };
    line.oracle = std::move(oracle);
  }
  return line;
}

ParticleCloud asmc_run(const ModelSpec& model, const EngineOptions& options) {
  const ModelSpec line = lumped_model(model);
  EngineOptions opts = options;
  opts.strategy = Strategy{Strategy::Kind::kGeneric};
  opts.node_strategy.clear();
  opts.node_n.clear();
  return dac_smc(line, line.tree().root(), opts);
}

}  // namespace dacsmc
