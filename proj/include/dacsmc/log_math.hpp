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

#ifndef DACSMC_LOG_MATH_HPP
#define DACSMC_LOG_MATH_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <utility>

namespace dacsmc {

/**
 * log(sum(exp(x))) with a max shift and a pairwise summation of the shifted
 * terms, so the result does not depend on thread count or call site for a
 * fixed input order. Returns -inf for an empty span or all -inf entries.
 */
[[nodiscard]] double log_sum_exp(std::span<const double> log_values) noexcept;

/// log_sum_exp(x) - log(size).
[[nodiscard]] double log_mean_exp(std::span<const double> log_values) noexcept;

/// Pairwise sum; same ordering guarantee as log_sum_exp.
[[nodiscard]] double pairwise_sum(std::span<const double> values) noexcept;

/// Numerically safe log(a + b) given log a and log b.
[[nodiscard]] inline double log_add(double log_a, double log_b) noexcept {
  if (log_a < log_b) {
    std::swap(log_a, log_b);
  }
  if (std::isinf(log_b) && log_b < 0) {
    return log_a;
  }
  return log_a + std::log1p(std::exp(log_b - log_a));
}

[[nodiscard]] inline double normal_logpdf(double x, double mean, double variance) noexcept {
  const double z = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + z * z / variance);
}

/// log(1 + exp(x)) without overflow.
[[nodiscard]] inline double softplus(double x) noexcept {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// log of the logistic density alpha(x) (1 - alpha(x)).
[[nodiscard]] inline double log_logistic_density(double x) noexcept { return -softplus(x) - softplus(-x); }

}  // namespace dacsmc

#endif  // DACSMC_LOG_MATH_HPP
