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


#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dacsmc/error.hpp"
#include "dacsmc/log_math.hpp"
#include "dacsmc/models.hpp"

namespace dacsmc {

double schools_node_log_weight(double theta, double s2, std::span<const double> child_thetas) {
  const auto k = static_cast<double>(child_thetas.size());
  double mean = 0.0;
  for (const double t : child_thetas) {
    mean += t;
  }
  mean /= k;
  double ss = 0.0;
  for (const double t : child_thetas) {
    ss += (t - mean) * (t - mean);
  }
  return log_logistic_density(theta) - ss / (2.0 * s2) - 0.5 * std::log(k) -
         0.5 * (k - 1.0) * std::log(2.0 * std::numbers::pi * s2);
}

std::vector<School> load_schools_csv(const std::string& path) {
  std::ifstream in{path};
  require(in.good(), ErrorCode::kIo, "cannot open schools data '" + path + "'");
  std::vector<School> out;
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") {
      continue;
    }
    std::stringstream ss{line};
    std::string school;
    std::string year;
    std::string total;
    std::string passed;
    const bool ok = std::getline(ss, school, ',') && std::getline(ss, year, ',') && std::getline(ss, total, ',') &&
                    std::getline(ss, passed);
    require(ok, ErrorCode::kInvalidData, path + ":" + std::to_string(line_no) + ": expected school,year,M,m");
    SchoolYear sy{year, 0, 0};
    try {
      sy.total = std::stoi(total);
      sy.passed = std::stoi(passed);
    } catch (const std::exception&) {
      throw Error{ErrorCode::kInvalidData, path + ":" + std::to_string(line_no) + ": counts must be integers"};
    }
    auto it = std::find_if(out.begin(), out.end(), [&](const School& s) { return s.name == school; });
    if (it == out.end()) {
      out.push_back(School{school, {}});
      it = out.end() - 1;
    }
    it->years.push_back(sy);
  }
  return out;
}

ModelSpec schools_model(const std::vector<School>& data) {
  require(!data.empty(), ErrorCode::kInvalidCounts, "schools data is empty");
  std::vector<std::optional<NodeId>> parents{std::nullopt};
  for (std::size_t s = 0; s < data.size(); ++s) {
    require(!data[s].years.empty(), ErrorCode::kInvalidCounts, "school '" + data[s].name + "' has no years");
    parents.emplace_back(NodeId{0});
  }
  std::vector<const SchoolYear*> leaf_data(parents.size(), nullptr);
  for (std::size_t s = 0; s < data.size(); ++s) {
    for (const SchoolYear& y : data[s].years) {
      require(y.total >= 0 && y.passed >= 0 && y.passed <= y.total, ErrorCode::kInvalidCounts,
              "school '" + data[s].name + "' year '" + y.year + "' has m=" + std::to_string(y.passed) +
                  " of M=" + std::to_string(y.total));
      parents.emplace_back(static_cast<NodeId>(s + 1));
      leaf_data.push_back(&y);
    }
  }
  const Tree tree = build_tree(parents);
  std::vector<NodeSpace> spaces;
  for (NodeId u = 0; u < tree.size(); ++u) {
    spaces.push_back(tree.is_leaf(u) ? NodeSpace::continuous(1, {"theta"})
                                     : NodeSpace::continuous(2, {"theta", "sigma2"}));
  }
  ModelSpec model{"schools", tree, std::move(spaces)};

  // Weight of a school or the root over its subtree path; child thetas sit at a fixed offset in each child slice.
  const auto node_weight = [](std::vector<Slice> slices, std::size_t theta_back) {
    return [slices, theta_back](PathView p) {
      std::vector<double> thetas;
      thetas.reserve(slices.size());
      for (const Slice& s : slices) {
        thetas.push_back(p[s.offset + s.width - theta_back]);
      }
      const std::size_t own = p.size() - 2;
      return schools_node_log_weight(p[own], p[own + 1], thetas);
    };
  };
  const auto kernel = [](std::vector<Slice> slices, std::size_t theta_back) {
    return [slices, theta_back](PathView children, RngStream& rng, MutablePathView own) {
      double mean = 0.0;
      for (const Slice& s : slices) {
        mean += children[s.offset + s.width - theta_back];
      }
      const auto k = static_cast<double>(slices.size());
      mean /= k;
      const double s2 = rng.exponential_mean(1.0);
      own[0] = rng.normal(mean, std::sqrt(s2 / k));
      own[1] = s2;
    };
  };

  for (NodeId u = 0; u < tree.size(); ++u) {
    if (tree.is_leaf(u)) {
      const double a = leaf_data[u]->passed + 1.0;
      const double b = leaf_data[u]->total - leaf_data[u]->passed + 1.0;
      model.leaf_proposals[u] = [a, b](RngStream& rng, MutablePathView own) {
        const double p = rng.beta(a, b);
        own[0] = std::log(p) - std::log1p(-p);
      };
      // The Beta-logit proposal has mass (M + 1) against the binomial-likelihood target.
      model.target_weights[u] = [w = -std::log(leaf_data[u]->total + 1.0)](PathView) { return w; };
      continue;
    }
    const std::vector<Slice> slices{model.child_slices(u).begin(), model.child_slices(u).end()};
    const bool is_root = u == tree.root();
    // Years carry theta only; schools carry (theta, sigma2).
    const std::size_t theta_back = is_root ? 2 : 1;
    model.kernels[u] = kernel(slices, theta_back);
    model.target_weights[u] = node_weight(slices, theta_back);
    FactorizedWeight aux;
    for (const NodeId v : tree.children(u)) {
      if (is_root) {
        aux.factors.push_back(node_weight(
            std::vector<Slice>{model.child_slices(v).begin(), model.child_slices(v).end()}, 1));
      } else {
        aux.factors.push_back([w = -std::log(leaf_data[v]->total + 1.0)](PathView) { return w; });
      }
    }
    model.aux_weights[u] = std::move(aux);
  }
  model.test_functions.push_back(TestFunction{
      tree.root(), "root_rate", [](PathView p) { return 1.0 / (1.0 + std::exp(-p[p.size() - 2])); }, 1.0});
  return model;
}

}  // namespace dacsmc
