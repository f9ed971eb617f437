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


#ifndef DACSMC_TESTS_SUPPORT_ORACLES_HPP
#define DACSMC_TESTS_SUPPORT_ORACLES_HPP

// Ground truth computed without the library's own oracles: variable
// elimination over the toy tables, closed-form Gaussian normalizers and
// plain replicate statistics.

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "dacsmc/models.hpp"

namespace dacsmc::testing {

/// m_v(x_v): mass of gamma_v with the own value of v pinned to x_v.
inline std::vector<double> toy_message(const DiscreteToyTables& t, NodeId v) {
  const std::size_t a = t.alphabet;
  if (t.tree.is_leaf(v)) {
    return t.leaf_proposal[v];
  }
  const auto kids = t.tree.children(v);
  std::vector<std::vector<double>> child_msgs;
  for (const NodeId c : kids) {
    child_msgs.push_back(toy_message(t, c));
  }
  std::size_t codes = 1;
  for (std::size_t j = 0; j < kids.size(); ++j) {
    codes *= a;
  }
  std::vector<double> out(a, 0.0);
  std::vector<std::size_t> digits(kids.size());
  for (std::size_t code = 0; code < codes; ++code) {
    std::size_t rest = code;
    for (std::size_t j = kids.size(); j-- > 0;) {
      digits[j] = rest % a;
      rest /= a;
    }
    double children = 1.0;
    for (std::size_t j = 0; j < kids.size(); ++j) {
      children *= child_msgs[j][digits[j]];
    }
    double aux = 0.0;
    switch (t.structure) {
      case ToyStructure::kGeneral:
        aux = t.aux[v][code];
        break;
      case ToyStructure::kFactorized:
        aux = 1.0;
        for (std::size_t j = 0; j < kids.size(); ++j) {
          aux *= t.factor[v][j][digits[j]];
        }
        break;
      case ToyStructure::kMixture:
        for (const auto& component : t.mixture[v]) {
          double prod = 1.0;
          for (std::size_t j = 0; j < kids.size(); ++j) {
            prod *= component[j][digits[j]];
          }
          aux += prod;
        }
        break;
    }
    for (std::size_t x = 0; x < a; ++x) {
      out[x] += children * aux * t.kernel[v][code * a + x];
    }
  }
  return out;
}

struct ToyTruth {
  double z{0.0};
  /// P(x_u = 0) under mu_u.
  double p_zero{0.0};
  /// E[x_u] under mu_u.
  double mean_value{0.0};
};

inline ToyTruth toy_truth(const DiscreteToyTables& t, NodeId u) {
  const auto m = toy_message(t, u);
  ToyTruth out;
  for (std::size_t x = 0; x < m.size(); ++x) {
    const double mass = t.target[u][x] * m[x];
    out.z += mass;
    out.mean_value += static_cast<double>(x) * mass;
  }
  out.p_zero = t.target[u][0] * m[0] / out.z;
  out.mean_value /= out.z;
  return out;
}

struct Moments {
  double mean{0.0};
  double variance{0.0};
  double se{0.0};
};

inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  const auto n = static_cast<double>(xs.size());
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (const double x : xs) {
    ss += (x - m.mean) * (x - m.mean);
  }
  m.variance = ss / (n - 1.0);
  m.se = std::sqrt(m.variance / n);
  return m;
}

}  // namespace dacsmc::testing

#endif  // DACSMC_TESTS_SUPPORT_ORACLES_HPP
