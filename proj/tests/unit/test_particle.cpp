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

#include <cmath>
#include <stdexcept>

#include "dacsmc/error.hpp"
#include "dacsmc/particle.hpp"
#include "support/toy_models.hpp"

using namespace dacsmc;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

PathMatrix column(std::vector<double> xs) {
  PathMatrix m{xs.size(), 1};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m.row(i)[0] = xs[i];
  }
  return m;
}

}  // namespace

TEST_CASE("cloud weights are normalized and unweighted clouds scale exactly") {
  const ParticleCloud plain{3, column({1, 2, 3, 4}), 0.5};
  CHECK_FALSE(plain.is_weighted());
  CHECK(plain.log_scaled_weight(2) == 0.0);
  CHECK(plain.log_weight(1) == doctest::Approx(-std::log(4.0)));
  const ParticleCloud weighted{3, column({1, 2}), 0.0, {std::log(3.0), std::log(1.0)}};
  CHECK(weighted.is_weighted());
  CHECK(std::exp(weighted.log_weight(0)) == doctest::Approx(0.75));
  CHECK(std::exp(weighted.log_scaled_weight(1)) == doctest::Approx(0.5));
  CHECK(code_of([] { ParticleCloud bad{0, column({1, 2}), 0.0, {0.0}}; }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] {
          ParticleCloud bad{0, column({1, 2}), 0.0, {0.0, std::numeric_limits<double>::quiet_NaN()}};
        }) == ErrorCode::kNonFiniteWeight);
}

TEST_CASE("weighted atoms concatenate their source rows") {
  auto a = std::make_shared<const ParticleCloud>(1, column({10, 11}), std::log(2.0));
  auto b = std::make_shared<const ParticleCloud>(2, column({20, 21, 22}), std::log(3.0));
  const WeightedAtoms atoms{{a, b}, {1, 2, 0, 0}, {0.0, std::log(3.0)}, a->log_mass() + b->log_mass()};
  CHECK(atoms.size() == 2);
  CHECK(atoms.width() == 2);
  std::vector<double> out(2);
  atoms.materialize(0, out);
  CHECK(out == std::vector<double>{11, 22});
  const std::vector<std::size_t> picks{1, 1, 0};
  const PathMatrix rows = atoms.materialize_rows(picks);
  CHECK(rows.row(1)[0] == 10);
  CHECK(rows.row(2)[1] == 22);
  // mass = 6 * mean(1, 3) = 12
  CHECK(std::exp(atoms.log_mass()) == doctest::Approx(12.0));
}

TEST_CASE("leaf initialization and mutation") {
  const ModelSpec m = testing::star_model(2);
  RngStream rng{1, 0, 1, StreamPurpose::kLeafProposal};
  const ParticleCloud leaf = leaf_init(m, 1, 50, rng);
  CHECK(leaf.size() == 50);
  CHECK(leaf.log_mass() == 0.0);
  CHECK(code_of([&] { (void)leaf_init(m, 0, 5, rng); }) == ErrorCode::kInvalidNode);

  PathMatrix children{3, 2};
  for (std::size_t i = 0; i < 3; ++i) {
    children.row(i)[0] = static_cast<double>(i);
    children.row(i)[1] = -static_cast<double>(i);
  }
  const ParticleCloud root = mutate(children, m, 0, 1.25, rng);
  CHECK(root.width() == 3);
  CHECK(root.log_mass() == 1.25);
  CHECK(root.path(2)[0] == 2.0);
  CHECK(root.path(2)[1] == -2.0);
  CHECK(code_of([&] { (void)mutate(column({1, 2}), m, 0, 0.0, rng); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("sampler faults surface as SamplerFailure") {
  ModelSpec m = testing::star_model(2);
  RngStream rng{1, 0, 1, StreamPurpose::kLeafProposal};
  m.leaf_proposals[1] = [](RngStream&, MutablePathView) { throw std::runtime_error{"no"}; };
  CHECK(code_of([&] { (void)leaf_init(m, 1, 3, rng); }) == ErrorCode::kSamplerFailure);
  m.leaf_proposals[1] = [](RngStream&, MutablePathView own) { own[0] = std::nan(""); };
  CHECK(code_of([&] { (void)leaf_init(m, 1, 3, rng); }) == ErrorCode::kSamplerFailure);

  ModelSpec f{"finite", m.tree(), std::vector<NodeSpace>(3, NodeSpace::finite(2))};
  f.leaf_proposals[1] = [](RngStream&, MutablePathView own) { own[0] = 2.0; };
  CHECK(code_of([&] { (void)leaf_init(f, 1, 3, rng); }) == ErrorCode::kSamplerFailure);
}

TEST_CASE("target estimates integrate test functions against the reweighted cloud") {
  ModelSpec m = testing::star_model(2);
  m.target_weights[1] = [](PathView p) { return p[0]; };
  // Weights e^0, e^1, e^2 on values 0, 1, 2; mass e^0.5.
  const ParticleCloud c{1, column({0, 1, 2}), 0.5};
  const std::vector<TestFunction> tests{
      TestFunction{1, "id", [](PathView p) { return p[0]; }, std::nullopt},
      TestFunction{1, "one", [](PathView) { return 1.0; }, 1.0},
  };
  const TargetEstimates est = target_estimates(c, m, tests);
  const double e = std::exp(1.0);
  const double total = 1 + e + e * e;
  CHECK(est.log_z == doctest::Approx(0.5 + std::log(total / 3.0)));
  CHECK(est.mu[0] == doctest::Approx((e + 2 * e * e) / total));
  CHECK(est.mu[1] == doctest::Approx(1.0));
  CHECK(est.rho[1] == doctest::Approx(std::exp(est.log_z)));

  const std::vector<TestFunction> bounded{TestFunction{1, "b", [](PathView p) { return p[0]; }, 1.0}};
  CHECK(code_of([&] { (void)target_estimates(c, m, bounded); }) == ErrorCode::kInvalidArgument);
  m.target_weights[1] = [](PathView) { return -std::numeric_limits<double>::infinity(); };
  CHECK(code_of([&] { (void)target_estimates(c, m, tests); }) == ErrorCode::kNonFiniteWeight);
}

TEST_CASE("effective sample size") {
  const std::vector<double> flat(10, -3.0);
  CHECK(effective_sample_size(flat) == doctest::Approx(10.0));
  const std::vector<double> peaked{0.0, -50.0, -50.0, -50.0};
  CHECK(effective_sample_size(peaked) == doctest::Approx(1.0).epsilon(1e-9));
  const std::vector<double> two{std::log(1.0), std::log(3.0)};
  CHECK(effective_sample_size(two) == doctest::Approx(16.0 / 10.0));
  CHECK(effective_sample_size({}) == 0.0);
}
