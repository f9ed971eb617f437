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

#include "dacsmc/rng.hpp"

#include <random>

namespace dacsmc {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53U;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57U;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9U;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85U;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> detail::philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                   std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t replicate, std::uint32_t node, StreamPurpose purpose,
                     std::uint32_t substream) noexcept
    : seed_{seed}, replicate_{replicate} {
  // The key separates (seed, replicate); the high counter words separate
  // (node, purpose, substream); the low words count blocks.
  const std::uint64_t mixed = splitmix64(splitmix64(seed) ^ (replicate * 0xD6E8FEB86659FD93ULL + 0x2545F4914F6CDD1DULL));
  key_ = {static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32)};
  counter_ = {0U, (static_cast<std::uint32_t>(purpose) << 24) | (substream & 0x00FFFFFFU), node, 0U};
}

void RngStream::refill() noexcept {
  buffer_ = detail::philox4x32_10(counter_, key_);
  buffered_ = 4;
  // 64-bit block counter spread over words 0 and 3.
  if (++counter_[0] == 0) {
    ++counter_[3];
  }
}

RngStream::result_type RngStream::operator()() noexcept {
  if (buffered_ < 2) {
    refill();
  }
  const std::uint64_t hi = buffer_[4 - buffered_];
  const std::uint64_t lo = buffer_[5 - buffered_];
  buffered_ -= 2;
  return (hi << 32) | lo;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) noexcept {
  // Lemire's nearly divisionless bounded draw.
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::normal(double mean, double sd) {
  std::normal_distribution<double> dist{mean, sd};
  return dist(*this);
}

double RngStream::exponential_mean(double mean) {
  std::exponential_distribution<double> dist{1.0 / mean};
  return dist(*this);
}

double RngStream::gamma(double shape, double scale) {
  std::gamma_distribution<double> dist{shape, scale};
  return dist(*this);
}

double RngStream::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

std::uint64_t RngStream::stamp() const noexcept {
  return splitmix64((static_cast<std::uint64_t>(key_[1]) << 32 | key_[0]) ^
                    (static_cast<std::uint64_t>(counter_[1]) << 32 | counter_[2]));
}

}  // namespace dacsmc
