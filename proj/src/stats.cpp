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

#include "dacsmc/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "dacsmc/error.hpp"
#include "dacsmc/log_math.hpp"

namespace dacsmc {

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) {
    return s;
  }
  const auto n = static_cast<double>(xs.size());
  s.mean = pairwise_sum(xs) / n;
  if (xs.size() < 2) {
    return s;
  }
  std::vector<double> sq(xs.size());
  std::transform(xs.begin(), xs.end(), sq.begin(), [&](double x) { return (x - s.mean) * (x - s.mean); });
  s.variance = pairwise_sum(sq) / (n - 1.0);
  s.se = std::sqrt(s.variance / n);
  return s;
}

SlopeFit slope_fit(std::span<const std::pair<double, double>> points) {
  require(points.size() >= 3, ErrorCode::kDegenerateFit,
          "a slope fit needs at least 3 points, got " + std::to_string(points.size()));
  const auto n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : points) {
    require(std::isfinite(x) && std::isfinite(y), ErrorCode::kDegenerateFit, "slope fit points must be finite");
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  require(sxx > 0.0, ErrorCode::kDegenerateFit, "slope fit needs at least two distinct x values");
  SlopeFit fit;
  fit.points = points.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - fit.intercept - fit.slope * x;
    ssr += r * r;
  }
  fit.stderr_slope = std::sqrt(ssr / (n - 2.0) / sxx);
  return fit;
}

VarianceComparison compare_variances(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::kInvalidArgument, "paired samples must have equal sizes");
  require(a.size() >= 2, ErrorCode::kInvalidArgument, "variance comparison needs at least 2 pairs");
  const Summary sa = summarize(a);
  const Summary sb = summarize(b);
  const auto r = static_cast<double>(a.size());
  // d_r averages to the difference of the unbiased variances.
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = ((a[i] - sa.mean) * (a[i] - sa.mean) - (b[i] - sb.mean) * (b[i] - sb.mean)) * r / (r - 1.0);
  }
  const Summary sd = summarize(d);
  return VarianceComparison{sa.variance, sb.variance, sa.variance - sb.variance, sd.se};
}

double anderson_darling_p_value(double a) noexcept {
  // D'Agostino and Stephens, case of estimated mean and variance.
  if (a >= 0.6) {
    return std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  }
  if (a >= 0.34) {
    return std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  }
  if (a >= 0.2) {
    return 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  }
  return 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
}

NormalityDiagnostics gof_tests(std::span<const double> values, std::size_t min_rows) {
  require(values.size() >= min_rows, ErrorCode::kInsufficientRows,
          "normality diagnostics need at least " + std::to_string(min_rows) + " rows, got " +
              std::to_string(values.size()));
  NormalityDiagnostics out;
  out.count = values.size();
  const Summary s = summarize(values);
  if (!(s.variance > 0.0) || !std::isfinite(s.variance)) {
    out.degenerate = true;
    return out;
  }
  const double sd = std::sqrt(s.variance);
  std::vector<double> z(values.size());
  std::transform(values.begin(), values.end(), z.begin(), [&](double x) { return (x - s.mean) / sd; });
  std::sort(z.begin(), z.end());
  const auto n = static_cast<double>(z.size());
  double m3 = 0.0;
  double m4 = 0.0;
  for (const double v : z) {
    m3 += v * v * v;
    m4 += v * v * v * v;
  }
  // Moments about the sample mean with the (n-1) scale used for z.
  const double scale = (n - 1.0) / n;
  out.skewness = m3 / n / std::pow(scale, 1.5);
  out.excess_kurtosis = m4 / n / (scale * scale) - 3.0;

  const boost::math::normal normal;
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double lo = boost::math::cdf(normal, z[i]);
    const double hi = boost::math::cdf(boost::math::complement(normal, z[z.size() - 1 - i]));
    // Clamp away from 0 so a far outlier gives a huge but finite statistic.
    sum += (2.0 * static_cast<double>(i) + 1.0) * (std::log(std::max(lo, 1e-300)) + std::log(std::max(hi, 1e-300)));
  }
  const double a2 = -n - sum / n;
  out.anderson_darling = a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
  out.p_value = std::clamp(anderson_darling_p_value(out.anderson_darling), 0.0, 1.0);
  return out;
}

double chi_square_two_sample(std::span<const double> a, std::span<const double> b, std::size_t bins) {
  require(bins >= 2, ErrorCode::kInvalidArgument, "chi-square test needs at least 2 bins");
  require(!a.empty() && !b.empty(), ErrorCode::kInsufficientRows, "chi-square test needs two non-empty samples");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  std::vector<double> cuts;
  for (std::size_t k = 1; k < bins; ++k) {
    const double c = pooled[k * pooled.size() / bins];
    if (cuts.empty() || c > cuts.back()) {
      cuts.push_back(c);
    }
  }
  const std::size_t cells = cuts.size() + 1;
  require(cells >= 2, ErrorCode::kInsufficientRows, "pooled sample is constant; chi-square test is degenerate");
  const auto count = [&](std::span<const double> xs) {
    std::vector<double> c(cells, 0.0);
    for (const double x : xs) {
      c[static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin())] += 1.0;
    }
    return c;
  };
  const auto ca = count(a);
  const auto cb = count(b);
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  double stat = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < cells; ++k) {
    const double col = ca[k] + cb[k];
    if (col == 0.0) {
      continue;
    }
    ++used;
    const double ea = col * na / (na + nb);
    const double eb = col * nb / (na + nb);
    stat += (ca[k] - ea) * (ca[k] - ea) / ea + (cb[k] - eb) * (cb[k] - eb) / eb;
  }
  const boost::math::chi_squared dist{static_cast<double>(used - 1)};
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace dacsmc
