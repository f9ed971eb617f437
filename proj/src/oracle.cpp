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
#include "dacsmc/models.hpp"

namespace dacsmc {

OracleValues oracle_eval(const ModelSpec& model, NodeId u, std::span<const TestFunction> tests) {
  require(model.oracle != nullptr, ErrorCode::kNoOracle, "model '" + model.name() + "' has no oracle");
  if (!model.tree().contains(u)) {
    throw Error{ErrorCode::kInvalidNode, "node " + std::to_string(u) + " is not in the tree"};
  }
  OracleValues out;
  out.log_z = model.oracle->log_z(u);
  for (const TestFunction& f : tests) {
    if (f.node != u) {
      throw Error{ErrorCode::kInvalidArgument,
                  "test function '" + f.name + "' belongs to node " + std::to_string(f.node)};
    }
    out.mu.push_back(model.oracle->expectation(f));
  }
  return out;
}

}  // namespace dacsmc
