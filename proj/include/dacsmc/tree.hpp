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

#ifndef DACSMC_TREE_HPP
#define DACSMC_TREE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

/**
 * \file
 * \brief Rooted index trees, per-node spaces and the flat path layout of subtree product spaces.
 */

namespace dacsmc {

using NodeId = std::uint32_t;

/// The space E_u attached to one node: R^d or a finite alphabet {0, ..., m-1}.
struct NodeSpace {
  enum class Kind { kContinuous, kFinite };

  Kind kind{Kind::kContinuous};
  /// Dimension for continuous spaces, alphabet size for finite ones.
  std::size_t size{1};
  std::vector<std::string> labels;

  static NodeSpace continuous(std::size_t dimension, std::vector<std::string> labels = {});
  static NodeSpace finite(std::size_t alphabet);

  /// Number of path coordinates the node occupies. A finite value is stored as one coordinate.
  [[nodiscard]] std::size_t width() const noexcept { return kind == Kind::kContinuous ? size : 1; }
};

/// Immutable rooted tree. Children are ordered by ascending node id.
class Tree {
 public:
  [[nodiscard]] std::size_t size() const noexcept { return parent_.size(); }
  [[nodiscard]] NodeId root() const noexcept { return root_; }
  [[nodiscard]] bool contains(NodeId u) const noexcept { return u < parent_.size(); }
  [[nodiscard]] std::optional<NodeId> parent(NodeId u) const;
  [[nodiscard]] std::span<const NodeId> children(NodeId u) const;
  [[nodiscard]] bool is_leaf(NodeId u) const { return children(u).empty(); }
  /// Number of edges between u and the root.
  [[nodiscard]] std::size_t depth(NodeId u) const;
  /// Largest depth over all nodes.
  [[nodiscard]] std::size_t height() const noexcept { return height_; }
  /// Parent list in the form accepted by build_tree.
  [[nodiscard]] const std::vector<std::optional<NodeId>>& parents() const noexcept { return parent_; }

  bool operator==(const Tree& other) const { return parent_ == other.parent_; }

 private:
  friend Tree build_tree(std::span<const std::optional<NodeId>> parents);

  NodeId root_{0};
  std::vector<std::optional<NodeId>> parent_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::size_t> depth_;
  std::size_t height_{0};
};

/**
 * Builds a tree from a parent list; the single empty entry is the root.
 * Throws kMultipleRoots, kCycleDetected or kDanglingParent.
 */
[[nodiscard]] Tree build_tree(std::span<const std::optional<NodeId>> parents);

/// Depth-first enumeration of the subtree rooted at u, children subtrees in order, u last.
[[nodiscard]] std::vector<NodeId> subtree_nodes(const Tree& tree, NodeId u);

struct Slice {
  std::size_t offset{0};
  std::size_t width{0};

  bool operator==(const Slice&) const = default;
};

/**
 * Where each node of a subtree lives inside a flat path over that subtree.
 *
 * The order is the one of subtree_nodes: the subtrees of u's children in child
 * order, then u's own coordinates. A path over the children of u is therefore
 * the prefix of width children_width() of a path over u.
 */
class PathLayout {
 public:
  PathLayout(NodeId node, std::vector<std::pair<NodeId, Slice>> slices);

  [[nodiscard]] NodeId node() const noexcept { return node_; }
  [[nodiscard]] std::size_t total_width() const noexcept { return total_width_; }
  [[nodiscard]] std::span<const std::pair<NodeId, Slice>> slices() const noexcept { return slices_; }
  /// Throws kInvalidNode when v is not in the subtree.
  [[nodiscard]] Slice slice(NodeId v) const;
  [[nodiscard]] Slice own_slice() const noexcept { return slices_.back().second; }
  [[nodiscard]] std::size_t children_width() const noexcept { return total_width_ - own_slice().width; }

 private:
  NodeId node_;
  std::vector<std::pair<NodeId, Slice>> slices_;
  std::size_t total_width_{0};
};

/// Throws kMissingSpace when `spaces` does not cover the subtree.
[[nodiscard]] PathLayout path_layout(const Tree& tree, std::span<const NodeSpace> spaces, NodeId u);

/// A tree collapsed level by level into a line.
struct LumpedLevels {
  /// Line node t has child t-1; node 0 is the leaf and the last node the root.
  Tree line;
  /// groups[t] holds the original nodes at depth height - t, ascending.
  std::vector<std::vector<NodeId>> groups;
};

[[nodiscard]] LumpedLevels lump_levels(const Tree& tree);

}  // namespace dacsmc

#endif  // DACSMC_TREE_HPP
