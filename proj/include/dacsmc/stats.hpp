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

#ifndef DACSMC_STATS_HPP
#define DACSMC_STATS_HPP

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace dacsmc {

struct Summary {
  std::size_t count{0};
  double mean{0.0};
  /// Unbiased sample variance; zero below two values.
  double variance{0.0};
  double se{0.0};
};

[[nodiscard]] Summary summarize(std::span<const double> xs);

struct SlopeFit {
  double slope{0.0};
  double intercept{0.0};
  double stderr_slope{0.0};
  std::size_t points{0};
};

/// Ordinary least squares of y on x. Throws kDegenerateFit below three points or for constant x.
[[nodiscard]] SlopeFit slope_fit(std::span<const std::pair<double, double>> points);

struct VarianceComparison {
  double variance_a{0.0};
  double variance_b{0.0};
  /// variance_a - variance_b, from per-pair squared deviations.
  double difference{0.0};
  double se_difference{0.0};
};

/// Difference of sample variances over paired replicates a[r], b[r]. Throws kInvalidArgument on size mismatch or R < 2.
[[nodiscard]] VarianceComparison compare_variances(std::span<const double> a, std::span<const double> b);

struct NormalityDiagnostics {
  std::size_t count{0};
  double skewness{0.0};
  double excess_kurtosis{0.0};
  /// Anderson-Darling statistic with estimated mean and variance, small-sample adjusted.
  double anderson_darling{0.0};
  double p_value{0.0};
  /// All values equal: no test is possible.
  bool degenerate{false};
};

/// Standardizes the values and tests them for normality. Throws kInsufficientRows below `min_rows`.
[[nodiscard]] NormalityDiagnostics gof_tests(std::span<const double> values, std::size_t min_rows = 500);

/// Upper-tail p-value of the adjusted Anderson-Darling statistic for a normal with estimated parameters.
[[nodiscard]] double anderson_darling_p_value(double adjusted_statistic) noexcept;

/**
 * Two-sample chi-square homogeneity test on `bins` cells cut at quantiles of
 * the pooled sample. Returns the p-value.
 */
[[nodiscard]] double chi_square_two_sample(std::span<const double> a, std::span<const double> b, std::size_t bins);

}  // namespace dacsmc

#endif  // DACSMC_STATS_HPP
