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

#include "dacsmc/error.hpp"
#include "dacsmc/log_math.hpp"
#include "dacsmc/models.hpp"

namespace dacsmc {

std::vector<std::vector<double>> simulate_timevarying_data(std::size_t horizon, std::size_t units,
                                                           std::uint64_t seed) {
  RngStream rng{seed, 0, 0, StreamPurpose::kUser};
  std::vector<std::vector<double>> y(horizon + 1, std::vector<double>(units));
  double theta = rng.exponential_mean(1.0);
  for (std::size_t t = 0; t <= horizon; ++t) {
    if (t > 0) {
      theta = rng.exponential_mean(theta);
    }
    for (auto& v : y[t]) {
      v = rng.normal(rng.normal(0.0, std::sqrt(theta)), 1.0);
    }
  }
  return y;
}

ModelSpec timevarying_model(const TimeVaryingConfig& config) {
  const std::size_t horizon = config.horizon;
  const std::size_t units = config.units;
  require(horizon >= 1 && units >= 1, ErrorCode::kInvalidData, "time-varying model needs horizon >= 1 and units >= 1");
  const auto y = std::make_shared<const std::vector<std::vector<double>>>(
      config.y.empty() ? simulate_timevarying_data(horizon, units, config.data_seed) : config.y);
  require(y->size() == horizon + 1, ErrorCode::kInvalidData,
          "expected " + std::to_string(horizon + 1) + " rows of observations, got " + std::to_string(y->size()));
  for (const auto& row : *y) {
    require(row.size() == units, ErrorCode::kInvalidData, "every observation row needs one value per unit");
    for (const double v : row) {
      require(std::isfinite(v), ErrorCode::kInvalidData, "observations must be finite");
    }
  }

  const auto unit_id = [&](std::size_t t, std::size_t l) { return static_cast<NodeId>(horizon + 2 + t * units + l); };
  const std::size_t n = horizon + 2 + (horizon + 1) * units;
  std::vector<std::optional<NodeId>> parents(n);
  for (std::size_t t = 0; t <= horizon; ++t) {
    parents[t] = static_cast<NodeId>(t + 1);
    for (std::size_t l = 0; l < units; ++l) {
      parents[unit_id(t, l)] = static_cast<NodeId>(t + 1);
    }
  }
  const Tree tree = build_tree(parents);
  const bool conditional = config.variant == TimeVaryingVariant::kConditional;
  ModelSpec model{conditional ? "timevarying:conditional" : "timevarying:nested", tree,
                  std::vector<NodeSpace>(n, NodeSpace::continuous(1))};

  model.leaf_proposals[0] = [](RngStream& rng, MutablePathView own) { own[0] = rng.exponential_mean(1.0); };
  for (std::size_t t = 0; t <= horizon; ++t) {
    for (std::size_t l = 0; l < units; ++l) {
      model.leaf_proposals[unit_id(t, l)] = [obs = (*y)[t][l]](RngStream& rng, MutablePathView own) {
        own[0] = rng.normal(obs, 1.0);
      };
    }
  }

  for (std::size_t t = 0; t <= horizon; ++t) {
    const auto u = static_cast<NodeId>(t + 1);
    // The pivot theta_t is the first child; its value closes the first slice.
    const std::size_t theta_at = model.child_slices(u)[0].width - 1;
    if (t < horizon) {
      model.kernels[u] = [theta_at](PathView children, RngStream& rng, MutablePathView own) {
        own[0] = rng.exponential_mean(children[theta_at]);
      };
    } else {
      model.kernels[u] = [](PathView, RngStream&, MutablePathView own) { own[0] = 0.0; };
    }

    NestedWeight w;
    w.pivot = 0;
    if (conditional) {
      w.outer = [y, t](PathView pivot) {
        const double theta = pivot.back();
        double total = 0.0;
        for (const double obs : (*y)[t]) {
          total += normal_logpdf(obs, 0.0, 1.0 + theta);
        }
        return total;
      };
      w.conditional_unit = [y, t](PathView pivot, std::size_t l, RngStream& rng, MutablePathView out) {
        const double theta = pivot.back();
        const double shrink = theta / (1.0 + theta);
        out[0] = rng.normal(shrink * (*y)[t][l], std::sqrt(shrink));
      };
    } else {
      w.inner = [](PathView pivot, std::size_t, PathView unit) { return normal_logpdf(unit[0], 0.0, pivot.back()); };
    }
    model.aux_weights[u] = std::move(w);
  }

  const auto root = static_cast<NodeId>(horizon + 1);
  const std::size_t theta_at = model.child_slices(root)[0].width - 1;
  model.test_functions.push_back(
      TestFunction{root, "theta_last_above_one", [theta_at](PathView p) { return p[theta_at] > 1.0 ? 1.0 : 0.0; },
                   1.0});
  return model;
}

}  // namespace dacsmc
