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

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <set>

#include "dacsmc/error.hpp"
#include "dacsmc/log_math.hpp"
#include "dacsmc/resampling.hpp"
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

/// A scalar cloud with random values and, optionally, random weights.
CloudPtr random_cloud(NodeId node, std::size_t n, std::uint64_t seed, bool weighted, double log_mass) {
  RngStream rng{seed, 0, node, StreamPurpose::kUser};
  PathMatrix paths{n, 1};
  std::vector<double> lw;
  for (std::size_t i = 0; i < n; ++i) {
    paths.row(i)[0] = rng.normal(0.0, 1.0);
    if (weighted) {
      lw.push_back(rng.normal(0.0, 1.0));
    }
  }
  return std::make_shared<const ParticleCloud>(node, std::move(paths), log_mass, std::move(lw));
}

double chi_square_p(const std::vector<double>& expected_prob, const std::vector<std::size_t>& counts) {
  std::size_t total = 0;
  for (const auto c : counts) {
    total += c;
  }
  double stat = 0.0;
  int cells = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double e = expected_prob[k] * static_cast<double>(total);
    if (e <= 0) {
      continue;
    }
    stat += (static_cast<double>(counts[k]) - e) * (static_cast<double>(counts[k]) - e) / e;
    ++cells;
  }
  const boost::math::chi_squared dist{static_cast<double>(cells - 1)};
  return boost::math::cdf(boost::math::complement(dist, stat));
}

const LogWeightFn kSquare = [](PathView p) { return -0.5 * p[0] * p[0]; };
const LogWeightFn kShift = [](PathView p) { return 0.7 * p[0]; };

}  // namespace

TEST_CASE("alias sampler reproduces its probabilities") {
  const std::vector<double> lw{std::log(0.1), std::log(0.2), std::log(0.3), std::log(0.4), -1e300};
  const CategoricalSampler s{lw};
  CHECK(s.probability(3) == doctest::Approx(0.4));
  CHECK(s.probability(4) == 0.0);
  RngStream rng{3, 0, 0, StreamPurpose::kUser};
  std::vector<std::size_t> counts(5, 0);
  for (int i = 0; i < 100000; ++i) {
    ++counts[s.sample(rng)];
  }
  CHECK(counts[4] == 0);
  CHECK(chi_square_p({0.1, 0.2, 0.3, 0.4, 0.0}, counts) > 0.001);
}

TEST_CASE("categorical sampler rejects invalid weights") {
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(code_of([&] { CategoricalSampler s{std::vector<double>{ninf, ninf}}; }) == ErrorCode::kAllZeroWeights);
  CHECK(code_of([&] { CategoricalSampler s{std::vector<double>{0.0, std::nan("")}}; }) ==
        ErrorCode::kNonFiniteWeight);
  CHECK(code_of([&] { CategoricalSampler s{std::vector<double>{}}; }) == ErrorCode::kAllZeroWeights);
}

TEST_CASE("index sets") {
  const IndexSet diag = diagonal_index_set(4, 3);
  CHECK(diag.size() == 4);
  CHECK(std::vector<std::uint32_t>(diag.tuple(2).begin(), diag.tuple(2).end()) == std::vector<std::uint32_t>{2, 2, 2});

  const std::vector<std::vector<std::size_t>> offsets{{0, 0}, {0, 1}};
  const IndexSet cyc = cyclic_index_set(3, offsets);
  CHECK(cyc.size() == 6);
  CHECK(std::vector<std::uint32_t>(cyc.tuple(5).begin(), cyc.tuple(5).end()) == std::vector<std::uint32_t>{2, 0});

  RngStream rng{9, 0, 0, StreamPurpose::kDesign};
  CHECK(code_of([&] { (void)design_index_set(8, 2, 7, rng); }) == ErrorCode::kBudgetTooSmall);
  for (const std::size_t budget : {8UL, 20UL, 64UL}) {
    const IndexSet set = design_index_set(8, 2, budget, rng);
    CHECK(set.size() == budget);
    std::set<std::vector<std::uint32_t>> seen;
    for (std::size_t k = 0; k < set.size(); ++k) {
      seen.emplace(set.tuple(k).begin(), set.tuple(k).end());
    }
    // Distinct offset differences mean no tuple repeats while budget <= n^c.
    CHECK(seen.size() == budget);
    // Each full block uses every particle of every child once.
    for (std::size_t v = 0; v < 2; ++v) {
      std::set<std::uint32_t> first_block;
      for (std::size_t k = 0; k < 8; ++k) {
        first_block.insert(set.tuple(k)[v]);
      }
      CHECK(first_block.size() == 8);
    }
  }
}

TEST_CASE("complete correction: atom count, weights and mass") {
  auto a = random_cloud(1, 3, 1, false, 0.3);
  auto b = random_cloud(2, 4, 2, false, -0.2);
  const std::vector<CloudPtr> kids{a, b};
  const LogWeightFn w = [](PathView p) { return p[0] * p[1]; };
  const WeightedAtoms atoms = correct_general(kids, w, 0, 1 << 20);
  CHECK(atoms.size() == 12);
  CHECK(atoms.indices(5)[0] == 1);
  CHECK(atoms.indices(5)[1] == 1);
  std::vector<double> terms;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      terms.push_back(a->path(i)[0] * b->path(j)[0]);
    }
  }
  CHECK(atoms.log_mass() == doctest::Approx(0.1 + log_mean_exp(terms)).epsilon(1e-14));
  CHECK(code_of([&] { (void)correct_general(kids, w, 0, 11); }) == ErrorCode::kMaterializationCapExceeded);
  const LogWeightFn bad = [](PathView) { return std::numeric_limits<double>::infinity(); };
  CHECK(code_of([&] { (void)correct_general(kids, bad, 0, 1 << 20); }) == ErrorCode::kNonFiniteWeight);
}

TEST_CASE("factorized and mixture masses equal the complete correction") {
  for (const bool weighted : {false, true}) {
    auto a = random_cloud(1, 16, 3, weighted, 0.4);
    auto b = random_cloud(2, 16, 4, weighted, -1.1);
    auto c = random_cloud(3, 16, 5, weighted, 0.0);
    const std::vector<CloudPtr> kids{a, b, c};
    const std::vector<LogWeightFn> factors{kSquare, kShift, kSquare};
    const FactorizedWeight fw{factors};
    const std::vector<Slice> slices{{0, 1}, {1, 1}, {2, 1}};
    const LogWeightFn general = [&](PathView p) { return evaluate_log_weight(fw, slices, p); };
    const WeightedAtoms atoms = correct_general(kids, general, 0, 1 << 20);
    RngStream rng{1, 0, 0, StreamPurpose::kResample};
    const Resampled r = resample_factorized(kids, factors, 16, rng, 0);
    CHECK(std::abs(r.log_mass - atoms.log_mass()) <= 1e-12);

    const MixtureWeight mw{{factors, {kShift, kShift, kShift}}};
    const LogWeightFn mixture = [&](PathView p) { return evaluate_log_weight(mw, slices, p); };
    const WeightedAtoms matoms = correct_general(kids, mixture, 0, 1 << 20);
    const Resampled mr = resample_mixture(kids, mw, 16, rng, 0);
    CHECK(std::abs(mr.log_mass - matoms.log_mass()) <= 1e-12);
  }
}

TEST_CASE("factorized and mixture tuple laws equal the atom law exactly on small clouds") {
  for (std::size_t n = 1; n <= 4; ++n) {
    auto a = random_cloud(1, n, 10 + n, true, 0.0);
    auto b = random_cloud(2, n, 20 + n, false, 0.0);
    const std::vector<CloudPtr> kids{a, b};
    const std::vector<LogWeightFn> factors{kSquare, kShift};
    const std::vector<Slice> slices{{0, 1}, {1, 1}};
    const FactorizedWeight fw{factors};
    const WeightedAtoms atoms =
        correct_general(kids, [&](PathView p) { return evaluate_log_weight(fw, slices, p); }, 0, 1 << 20);
    const CategoricalSampler generic{atoms.log_weights()};
    const auto law = factorized_tuple_law(kids, factors, 0);
    REQUIRE(law.size() == atoms.size());
    for (std::size_t k = 0; k < law.size(); ++k) {
      CHECK(law[k] == doctest::Approx(generic.probability(k)).epsilon(1e-12));
    }

    const MixtureWeight mw{{factors, {kShift, kSquare}}};
    const WeightedAtoms matoms =
        correct_general(kids, [&](PathView p) { return evaluate_log_weight(mw, slices, p); }, 0, 1 << 20);
    const CategoricalSampler mgeneric{matoms.log_weights()};
    const auto mlaw = mixture_tuple_law(kids, mw, 0);
    for (std::size_t k = 0; k < mlaw.size(); ++k) {
      CHECK(mlaw[k] == doctest::Approx(mgeneric.probability(k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("factorized and mixture draws follow their tuple laws") {
  auto a = random_cloud(1, 3, 31, false, 0.0);
  auto b = random_cloud(2, 3, 32, true, 0.0);
  const std::vector<CloudPtr> kids{a, b};
  const std::vector<LogWeightFn> factors{kSquare, kShift};
  const MixtureWeight mw{{factors, {kShift, kSquare}}};
  const auto flaw = factorized_tuple_law(kids, factors, 0);
  const auto mlaw = mixture_tuple_law(kids, mw, 0);
  const auto tuple_of = [&](PathView row) {
    std::size_t i = 0, j = 0;
    while (a->path(i)[0] != row[0]) ++i;
    while (b->path(j)[0] != row[1]) ++j;
    return i * 3 + j;
  };
  RngStream rng{4, 0, 0, StreamPurpose::kResample};
  std::vector<std::size_t> fc(9, 0), mc(9, 0);
  std::vector<std::size_t> comps;
  std::size_t comp0 = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const Resampled f = resample_factorized(kids, factors, 100, rng, 0);
    const Resampled m = resample_mixture(kids, mw, 100, rng, 0, &comps);
    comp0 += comps[0];
    for (std::size_t r = 0; r < 100; ++r) {
      ++fc[tuple_of(f.paths.row(r))];
      ++mc[tuple_of(m.paths.row(r))];
    }
  }
  CHECK(chi_square_p(flaw, fc) > 0.001);
  CHECK(chi_square_p(mlaw, mc) > 0.001);
  CHECK(comp0 > 0);
}

TEST_CASE("nested resampling: mass identity and cache transparency") {
  auto pivot = random_cloud(1, 12, 41, true, 0.2);
  auto u1 = random_cloud(2, 12, 42, false, -0.3);
  auto u2 = random_cloud(3, 12, 43, true, 0.1);
  const std::vector<CloudPtr> kids{u1, pivot, u2};
  const std::vector<Slice> slices{{0, 1}, {1, 1}, {2, 1}};
  NestedWeight nw;
  nw.pivot = 1;
  nw.outer = kShift;
  nw.inner = [](PathView p, std::size_t l, PathView x) {
    return -0.5 * (x[0] - p[0]) * (x[0] - p[0]) / (1.0 + static_cast<double>(l));
  };
  const WeightedAtoms atoms =
      correct_general(kids, [&](PathView p) { return evaluate_log_weight(nw, slices, p); }, 0, 1 << 20);
  RngStream r1{5, 0, 0, StreamPurpose::kResample};
  RngStream r2{5, 0, 0, StreamPurpose::kResample};
  NestedStats cached_stats;
  NestedStats fresh_stats;
  const Resampled cached = resample_nested(kids, slices, nw, 200, r1, 0, NestedOptions{true}, &cached_stats);
  const Resampled fresh = resample_nested(kids, slices, nw, 200, r2, 0, NestedOptions{false}, &fresh_stats);
  CHECK(std::abs(cached.log_mass - atoms.log_mass()) <= 1e-12);
  CHECK(cached.paths == fresh.paths);
  CHECK(fresh_stats.inner_tables_built == 200);
  CHECK(cached_stats.inner_tables_built <= 12);
}

TEST_CASE("conditional nested resampling reuses draws per slot") {
  auto pivot = random_cloud(1, 4, 51, false, 0.0);
  const std::vector<CloudPtr> kids{pivot, nullptr};
  const std::vector<Slice> slices{{0, 1}, {1, 1}};
  NestedWeight nw;
  nw.pivot = 0;
  nw.outer = kSquare;
  int calls = 0;
  nw.conditional_unit = [&calls](PathView p, std::size_t, RngStream& rng, MutablePathView out) {
    ++calls;
    out[0] = p[0] + rng.normal(0.0, 1.0);
  };
  RngStream rng{6, 0, 0, StreamPurpose::kResample};
  const Resampled r = resample_nested(kids, slices, nw, 500, rng, 0);
  // At most 4 pivots x 4 slots distinct draws.
  CHECK(calls <= 16);
  CHECK(r.log_mass == doctest::Approx(log_mean_exp(std::vector<double>{
                          kSquare(pivot->path(0)), kSquare(pivot->path(1)), kSquare(pivot->path(2)),
                          kSquare(pivot->path(3))})));
}

TEST_CASE("incomplete correction on the diagonal") {
  auto a = random_cloud(1, 5, 61, false, 0.5);
  auto b = random_cloud(2, 5, 62, false, 0.25);
  const std::vector<CloudPtr> kids{a, b};
  const LogWeightFn w = [](PathView p) { return p[0] - p[1]; };
  const WeightedAtoms atoms = correct_incomplete(kids, w, diagonal_index_set(5, 2), 0);
  std::vector<double> terms;
  for (std::size_t k = 0; k < 5; ++k) {
    terms.push_back(a->path(k)[0] - b->path(k)[0]);
  }
  CHECK(atoms.log_mass() == doctest::Approx(0.75 + log_mean_exp(terms)).epsilon(1e-14));
  IndexSet empty{5, 2, {}};
  CHECK(code_of([&] { (void)correct_incomplete(kids, w, empty, 0); }) == ErrorCode::kEmptyIndexSet);
}
