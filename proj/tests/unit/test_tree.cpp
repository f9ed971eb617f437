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

#include <algorithm>
#include <numeric>

#include "dacsmc/error.hpp"
#include "dacsmc/rng.hpp"
#include "dacsmc/tree.hpp"

using namespace dacsmc;

namespace {

Tree binary7() {
  const std::vector<std::optional<NodeId>> p{std::nullopt, 0, 0, 1, 1, 2, 2};
  return build_tree(p);
}

ErrorCode code_of(const std::vector<std::optional<NodeId>>& parents) {
  try {
    (void)build_tree(parents);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;  // stands for "did not throw"
}

}  // namespace

TEST_CASE("build_tree derives children, depth and height") {
  const Tree t = binary7();
  CHECK(t.size() == 7);
  CHECK(t.root() == 0);
  CHECK(std::vector<NodeId>(t.children(1).begin(), t.children(1).end()) == std::vector<NodeId>{3, 4});
  CHECK(t.is_leaf(6));
  CHECK_FALSE(t.is_leaf(2));
  CHECK(t.depth(5) == 2);
  CHECK(t.height() == 2);
  CHECK(t.parent(4) == std::optional<NodeId>{1});
  CHECK_FALSE(t.parent(0).has_value());
}

TEST_CASE("single node tree") {
  const std::vector<std::optional<NodeId>> p{std::nullopt};
  const Tree t = build_tree(p);
  CHECK(t.height() == 0);
  CHECK(t.is_leaf(0));
  CHECK(subtree_nodes(t, 0) == std::vector<NodeId>{0});
}

TEST_CASE("malformed parent lists are rejected") {
  CHECK(code_of({std::nullopt, std::nullopt}) == ErrorCode::kMultipleRoots);
  CHECK(code_of({1, 0}) == ErrorCode::kCycleDetected);
  CHECK(code_of({std::nullopt, 2, 1}) == ErrorCode::kCycleDetected);
  CHECK(code_of({std::nullopt, 5}) == ErrorCode::kDanglingParent);
  CHECK(code_of({}) == ErrorCode::kInvalidArgument);
  CHECK_THROWS_AS((void)binary7().children(9), Error);
}

TEST_CASE("subtree enumeration is post-order with children in order") {
  const Tree t = binary7();
  CHECK(subtree_nodes(t, 0) == std::vector<NodeId>{3, 4, 1, 5, 6, 2, 0});
  CHECK(subtree_nodes(t, 2) == std::vector<NodeId>{5, 6, 2});
}

TEST_CASE("path layout places each node's coordinates after its descendants") {
  const Tree t = binary7();
  std::vector<NodeSpace> spaces(7, NodeSpace::continuous(1));
  spaces[1] = NodeSpace::continuous(2);
  spaces[5] = NodeSpace::finite(4);
  const PathLayout layout = path_layout(t, spaces, 0);
  CHECK(layout.total_width() == 8);
  CHECK(layout.slice(1) == Slice{2, 2});
  CHECK(layout.slice(5) == Slice{4, 1});
  CHECK(layout.own_slice() == Slice{7, 1});
  CHECK(layout.children_width() == 7);
  CHECK_THROWS_AS((void)path_layout(t, std::span<const NodeSpace>{spaces}.first(3), 0), Error);
  const PathLayout sub = path_layout(t, spaces, 1);
  CHECK_THROWS_AS((void)sub.slice(2), Error);
}

TEST_CASE("random trees: layouts tile the path and subtrees partition") {
  RngStream rng{11, 0, 0, StreamPurpose::kUser};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(30);
    // Random labelling of a random recursive tree.
    std::vector<NodeId> label(n);
    std::iota(label.begin(), label.end(), 0);
    std::shuffle(label.begin(), label.end(), rng);
    std::vector<std::optional<NodeId>> parents(n);
    for (std::size_t k = 1; k < n; ++k) {
      parents[label[k]] = label[rng.uniform_index(k)];
    }
    const Tree t = build_tree(parents);
    CHECK(t.root() == label[0]);
    std::vector<NodeSpace> spaces;
    std::size_t total = 0;
    for (std::size_t k = 0; k < n; ++k) {
      spaces.push_back(NodeSpace::continuous(1 + rng.uniform_index(3)));
      total += spaces.back().width();
    }
    auto order = subtree_nodes(t, t.root());
    REQUIRE(order.size() == n);
    CHECK(order.back() == t.root());
    std::sort(order.begin(), order.end());
    CHECK(std::adjacent_find(order.begin(), order.end()) == order.end());
    const PathLayout layout = path_layout(t, spaces, t.root());
    CHECK(layout.total_width() == total);
    for (NodeId u = 0; u < n; ++u) {
      // Subtree of u is a contiguous block ending at u's own slice.
      const PathLayout sub = path_layout(t, spaces, u);
      const Slice own = layout.slice(u);
      const std::size_t start = own.offset + own.width - sub.total_width();
      for (const auto& [v, s] : sub.slices()) {
        CHECK(layout.slice(v).offset == start + s.offset);
      }
      for (const NodeId c : t.children(u)) {
        CHECK(t.depth(c) == t.depth(u) + 1);
      }
    }
  }
}

TEST_CASE("level lumping groups nodes by height above the leaves") {
  const Tree t = binary7();
  const LumpedLevels lumped = lump_levels(t);
  REQUIRE(lumped.groups.size() == 3);
  CHECK(lumped.groups[0] == std::vector<NodeId>{3, 4, 5, 6});
  CHECK(lumped.groups[1] == std::vector<NodeId>{1, 2});
  CHECK(lumped.groups[2] == std::vector<NodeId>{0});
  CHECK(lumped.line.root() == 2);
  CHECK(lumped.line.parent(0) == std::optional<NodeId>{1});
  CHECK(lumped.line.height() == 2);
}
