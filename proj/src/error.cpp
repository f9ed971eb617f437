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


#include "dacsmc/error.hpp"

namespace dacsmc {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMultipleRoots: return "MultipleRoots";
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kDanglingParent: return "DanglingParent";
    case ErrorCode::kInvalidNode: return "InvalidNode";
    case ErrorCode::kMissingSpace: return "MissingSpace";
    case ErrorCode::kSamplerFailure: return "SamplerFailure";
    case ErrorCode::kNonFiniteWeight: return "NonFiniteWeight";
    case ErrorCode::kZeroNormalizer: return "ZeroNormalizer";
    case ErrorCode::kAllZeroWeights: return "AllZeroWeights";
    case ErrorCode::kMaterializationCapExceeded: return "MaterializationCapExceeded";
    case ErrorCode::kEmptyIndexSet: return "EmptyIndexSet";
    case ErrorCode::kBudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::kStrategyIncompatible: return "StrategyIncompatible";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kInvalidCounts: return "InvalidCounts";
    case ErrorCode::kInvalidData: return "InvalidData";
    case ErrorCode::kNoOracle: return "NoOracle";
    case ErrorCode::kDegenerateFit: return "DegenerateFit";
    case ErrorCode::kInsufficientRows: return "InsufficientRows";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace dacsmc
