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

#include "dacsmc/log_math.hpp"

#include <algorithm>
#include <limits>

namespace dacsmc {
namespace {

constexpr std::size_t kPairwiseLeaf = 32;

double pairwise_shifted_exp_sum(std::span<const double> xs, double shift) noexcept {
  if (xs.size() <= kPairwiseLeaf) {
    double total = 0.0;
    for (const double x : xs) {
      total += std::exp(x - shift);
    }
    return total;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_shifted_exp_sum(xs.first(half), shift) + pairwise_shifted_exp_sum(xs.subspan(half), shift);
}

}  // namespace

double pairwise_sum(std::span<const double> values) noexcept {
  if (values.size() <= kPairwiseLeaf) {
    double total = 0.0;
    for (const double v : values) {
      total += v;
    }
    return total;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double log_sum_exp(std::span<const double> log_values) noexcept {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (log_values.empty()) {
    return kNegInf;
  }
  const double shift = *std::max_element(log_values.begin(), log_values.end());
  if (!std::isfinite(shift)) {
    // all -inf, or a +inf / NaN entry that the caller must reject
    return shift;
  }
  return shift + std::log(pairwise_shifted_exp_sum(log_values, shift));
}

double log_mean_exp(std::span<const double> log_values) noexcept {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (log_values.empty()) {
    return kNegInf;
  }
  const double shift = *std::max_element(log_values.begin(), log_values.end());
  if (!std::isfinite(shift)) {
    return shift;
  }
  // Subtract log n before adding the shift, so equal inputs come back exactly.
  const double n = static_cast<double>(log_values.size());
  return shift + (std::log(pairwise_shifted_exp_sum(log_values, shift)) - std::log(n));
}

}  // namespace dacsmc
