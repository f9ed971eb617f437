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


#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "dacsmc/error.hpp"
#include "dacsmc/log_math.hpp"
#include "dacsmc/rng.hpp"
#include "support/oracles.hpp"

using namespace dacsmc;

TEST_CASE("philox matches the published known-answer vectors") {
  const auto zero = detail::philox4x32_10({0, 0, 0, 0}, {0, 0});
  CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5U, 0xe169c58dU, 0xbc57ac4cU, 0x9b00dbd8U});
  const auto ones = detail::philox4x32_10({~0U, ~0U, ~0U, ~0U}, {~0U, ~0U});
  CHECK(ones == std::array<std::uint32_t, 4>{0x408f276dU, 0x41c83b0eU, 0xa20bc7c6U, 0x6d5451fdU});
  const auto pi = detail::philox4x32_10({0x243f6a88U, 0x85a308d3U, 0x13198a2eU, 0x03707344U},
                                        {0xa4093822U, 0x299f31d0U});
  CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09U, 0x94fdccebU, 0x5001e420U, 0x24126ea1U});
}

TEST_CASE("streams are pure functions of their address") {
  RngStream a{42, 3, 7, StreamPurpose::kResample};
  RngStream b{42, 3, 7, StreamPurpose::kResample};
  for (int i = 0; i < 100; ++i) {
    CHECK(a() == b());
  }
  std::set<std::uint64_t> firsts;
  firsts.insert(RngStream{42, 3, 7, StreamPurpose::kResample}());
  firsts.insert(RngStream{42, 4, 7, StreamPurpose::kResample}());
  firsts.insert(RngStream{42, 3, 8, StreamPurpose::kResample}());
  firsts.insert(RngStream{42, 3, 7, StreamPurpose::kMutate}());
  firsts.insert(RngStream{42, 3, 7, StreamPurpose::kResample, 1}());
  firsts.insert(RngStream{43, 3, 7, StreamPurpose::kResample}());
  CHECK(firsts.size() == 6);
  const RngStream c{42, 3, 7, StreamPurpose::kResample};
  RngStream d = c.derive(9, StreamPurpose::kGate);
  RngStream e{42, 3, 9, StreamPurpose::kGate};
  CHECK(d() == e());
}

TEST_CASE("distribution helpers have the right moments") {
  RngStream rng{1, 0, 0, StreamPurpose::kUser};
  constexpr int kDraws = 200000;
  std::vector<double> u, z, ex, be;
  std::vector<int> counts(7, 0);
  for (int i = 0; i < kDraws; ++i) {
    const double x = rng.uniform01();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    u.push_back(x);
    z.push_back(rng.normal(1.0, 2.0));
    ex.push_back(rng.exponential_mean(3.0));
    be.push_back(rng.beta(2.0, 5.0));
    const auto k = rng.uniform_index(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  // Tolerances are five standard errors.
  const auto mu = testing::moments(u);
  CHECK(std::abs(mu.mean - 0.5) < 5 * mu.se);
  const auto mz = testing::moments(z);
  CHECK(std::abs(mz.mean - 1.0) < 5 * mz.se);
  CHECK(std::abs(mz.variance - 4.0) < 0.1);
  const auto me = testing::moments(ex);
  CHECK(std::abs(me.mean - 3.0) < 5 * me.se);
  const auto mb = testing::moments(be);
  CHECK(std::abs(mb.mean - 2.0 / 7.0) < 5 * mb.se);
  double chi2 = 0.0;
  for (const int c : counts) {
    const double e = kDraws / 7.0;
    chi2 += (c - e) * (c - e) / e;
  }
  // 6 degrees of freedom; 22.46 is the 0.999 quantile.
  CHECK(chi2 < 22.46);
}

TEST_CASE("log-sum-exp is stable and exact on simple inputs") {
  const std::vector<double> xs{std::log(1.0), std::log(2.0), std::log(3.0)};
  CHECK(log_sum_exp(xs) == doctest::Approx(std::log(6.0)).epsilon(1e-15));
  CHECK(log_mean_exp(xs) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
  const std::vector<double> small{-1000.0, -1000.0 + std::log(3.0)};
  CHECK(log_sum_exp(small) == doctest::Approx(-1000.0 + std::log(4.0)));
  CHECK(std::isinf(log_sum_exp(std::vector<double>{})));
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp(std::vector<double>{ninf, ninf}) == ninf);
  CHECK(log_add(std::log(2.0), std::log(5.0)) == doctest::Approx(std::log(7.0)));
  CHECK(log_add(ninf, 1.5) == 1.5);
}

TEST_CASE("log-sum-exp does not depend on how the input was produced") {
  std::vector<double> xs(1000);
  RngStream rng{5, 0, 0, StreamPurpose::kUser};
  for (auto& x : xs) {
    x = rng.normal(0.0, 10.0);
  }
  const double a = log_sum_exp(xs);
  const std::vector<double> copy = xs;
  CHECK(log_sum_exp(copy) == a);
  double naive = 0.0;
  const double m = *std::max_element(xs.begin(), xs.end());
  for (const double x : xs) {
    naive += std::exp(x - m);
  }
  CHECK(a == doctest::Approx(m + std::log(naive)).epsilon(1e-13));
}

TEST_CASE("closed-form helpers") {
  CHECK(normal_logpdf(0.0, 0.0, 1.0) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)));
  CHECK(normal_logpdf(1.0, 3.0, 4.0) == doctest::Approx(-0.5 * std::log(8 * std::numbers::pi) - 0.5));
  CHECK(softplus(800.0) == doctest::Approx(800.0));
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(log_logistic_density(0.0) == doctest::Approx(std::log(0.25)));
}

TEST_CASE("error codes have stable names") {
  CHECK(to_string(ErrorCode::kNonFiniteWeight) == "NonFiniteWeight");
  CHECK(to_string(ErrorCode::kBudgetTooSmall) == "BudgetTooSmall");
  const Error e{ErrorCode::kTooLarge, "boom"};
  CHECK(e.code() == ErrorCode::kTooLarge);
  CHECK(std::string{e.what()} == "boom");
}

TEST_CASE("log_mean_exp returns equal inputs exactly") {
  for (const double v : {std::log(0.5), -3.7, 12.25, 0.0}) {
    for (const std::size_t n : {1UL, 3UL, 8UL, 1000UL}) {
      const std::vector<double> xs(n, v);
      CHECK(log_mean_exp(xs) == v);
    }
  }
}
