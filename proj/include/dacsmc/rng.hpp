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

#ifndef DACSMC_RNG_HPP
#define DACSMC_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace dacsmc {

/// What a stream is used for inside one node's step. Part of the stream identity.
enum class StreamPurpose : std::uint32_t {
  kLeafProposal = 1,
  kResample = 2,
  kMutate = 3,
  kGate = 4,
  kDesign = 5,
  kUser = 15,
};

namespace detail {
/// One Philox4x32 block with ten rounds.
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                                         std::array<std::uint32_t, 2> key) noexcept;
}  // namespace detail

/**
 * \brief Counter-based random stream (Philox4x32-10) addressed by
 * (seed, replicate, node, purpose, substream).
 *
 * The stream is a pure function of its address, so two runs with the same
 * address draw the same values regardless of thread scheduling. Satisfies
 * UniformRandomBitGenerator with 64-bit output.
 */
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t replicate, std::uint32_t node, StreamPurpose purpose,
            std::uint32_t substream = 0) noexcept;

  /// A stream sharing seed and replicate but with a different address.
  [[nodiscard]] RngStream derive(std::uint32_t node, StreamPurpose purpose, std::uint32_t substream = 0) const noexcept {
    return RngStream{seed_, replicate_, node, purpose, substream};
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;

  double normal(double mean, double sd);
  /// Exponential with the given mean (not rate).
  double exponential_mean(double mean);
  double gamma(double shape, double scale);
  double beta(double a, double b);

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t replicate() const noexcept { return replicate_; }
  [[nodiscard]] std::uint32_t node() const noexcept { return counter_[2]; }
  /// Compact identity of the stream, stamped onto the clouds it produced.
  [[nodiscard]] std::uint64_t stamp() const noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t replicate_;
  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_{0};
};

}  // namespace dacsmc

#endif  // DACSMC_RNG_HPP
