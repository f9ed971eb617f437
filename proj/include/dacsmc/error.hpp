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

#ifndef DACSMC_ERROR_HPP
#define DACSMC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace dacsmc {

/// Failure categories raised by the library. Every thrown dacsmc::Error carries one.
enum class ErrorCode {
  kInvalidArgument,
  // tree construction
  kMultipleRoots,
  kCycleDetected,
  kDanglingParent,
  kInvalidNode,
  kMissingSpace,
  // sampling and weighting
  kSamplerFailure,
  kNonFiniteWeight,
  kZeroNormalizer,
  kAllZeroWeights,
  kMaterializationCapExceeded,
  kEmptyIndexSet,
  kBudgetTooSmall,
  kStrategyIncompatible,
  // models
  kTooLarge,
  kInvalidCounts,
  kInvalidData,
  kNoOracle,
  // harness
  kDegenerateFit,
  kInsufficientRows,
  kInvalidConfig,
  kIo,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error{message}, code_{code} {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Throws Error{code, message} unless `condition` holds.
inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) {
    throw Error{code, message};
  }
}

}  // namespace dacsmc

#endif  // DACSMC_ERROR_HPP
