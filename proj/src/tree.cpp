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

#include "dacsmc/tree.hpp"

#include <algorithm>
#include <deque>

#include "dacsmc/error.hpp"

namespace dacsmc {

NodeSpace NodeSpace::continuous(std::size_t dimension, std::vector<std::string> labels) {
  require(dimension >= 1, ErrorCode::kInvalidArgument, "continuous space needs dimension >= 1");
  return NodeSpace{Kind::kContinuous, dimension, std::move(labels)};
}

NodeSpace NodeSpace::finite(std::size_t alphabet) {
  require(alphabet >= 1, ErrorCode::kInvalidArgument, "finite space needs alphabet size >= 1");
  return NodeSpace{Kind::kFinite, alphabet, {}};
}

std::optional<NodeId> Tree::parent(NodeId u) const {
  if (!contains(u)) {
    throw Error{ErrorCode::kInvalidNode, "node " + std::to_string(u) + " is not in the tree"};
  }
  return parent_[u];
}

std::span<const NodeId> Tree::children(NodeId u) const {
  if (!contains(u)) {
    throw Error{ErrorCode::kInvalidNode, "node " + std::to_string(u) + " is not in the tree"};
  }
  return children_[u];
}

std::size_t Tree::depth(NodeId u) const {
  if (!contains(u)) {
    throw Error{ErrorCode::kInvalidNode, "node " + std::to_string(u) + " is not in the tree"};
  }
  return depth_[u];
}

Tree build_tree(std::span<const std::optional<NodeId>> parents) {
  require(!parents.empty(), ErrorCode::kInvalidArgument, "a tree needs at least one node");
  const auto n = parents.size();
  Tree tree;
  tree.parent_.assign(parents.begin(), parents.end());
  tree.children_.resize(n);

  std::optional<NodeId> root;
  for (std::size_t u = 0; u < n; ++u) {
    const auto& p = parents[u];
    if (!p) {
      if (root) {
        throw Error{ErrorCode::kMultipleRoots,
                    "nodes " + std::to_string(*root) + " and " + std::to_string(u) + " both lack a parent"};
      }
      root = static_cast<NodeId>(u);
      continue;
    }
    if (*p >= n) {
      throw Error{ErrorCode::kDanglingParent,
                  "node " + std::to_string(u) + " points at missing parent " + std::to_string(*p)};
    }
    // Ascending push order keeps every children list sorted by id.
    tree.children_[*p].push_back(static_cast<NodeId>(u));
  }
  // With no root every node has a parent, which forces a cycle.
  require(root.has_value(), ErrorCode::kCycleDetected, "no root: the parent links form a cycle");
  tree.root_ = *root;

  tree.depth_.assign(n, 0);
  std::vector<bool> seen(n, false);
  std::deque<NodeId> queue{tree.root_};
  seen[tree.root_] = true;
  std::size_t reached = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    ++reached;
    tree.height_ = std::max(tree.height_, tree.depth_[u]);
    for (const NodeId v : tree.children_[u]) {
      tree.depth_[v] = tree.depth_[u] + 1;
      seen[v] = true;
      queue.push_back(v);
    }
  }
  if (reached != n) {
    throw Error{ErrorCode::kCycleDetected,
                std::to_string(n - reached) + " node(s) are unreachable from the root: the parent links form a cycle"};
  }
  return tree;
}

std::vector<NodeId> subtree_nodes(const Tree& tree, NodeId u) {
  if (!tree.contains(u)) {
    throw Error{ErrorCode::kInvalidNode, "node " + std::to_string(u) + " is not in the tree"};
  }
  std::vector<NodeId> order;
  // Iterative post-order: (node, index of next child to visit).
  std::vector<std::pair<NodeId, std::size_t>> stack{{u, 0}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const auto kids = tree.children(node);
    if (next < kids.size()) {
      const NodeId child = kids[next++];
      stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

PathLayout::PathLayout(NodeId node, std::vector<std::pair<NodeId, Slice>> slices)
    : node_{node}, slices_{std::move(slices)} {
  require(!slices_.empty() && slices_.back().first == node_, ErrorCode::kInvalidArgument,
          "a path layout must end with its own node");
  std::size_t offset = 0;
  for (const auto& [v, s] : slices_) {
    require(s.offset == offset, ErrorCode::kInvalidArgument, "path layout slices must be contiguous");
    offset += s.width;
  }
  total_width_ = offset;
}

Slice PathLayout::slice(NodeId v) const {
  for (const auto& [w, s] : slices_) {
    if (w == v) {
      return s;
    }
  }
  throw Error{ErrorCode::kInvalidNode,
              "node " + std::to_string(v) + " is not in the subtree of " + std::to_string(node_)};
}

PathLayout path_layout(const Tree& tree, std::span<const NodeSpace> spaces, NodeId u) {
  std::vector<std::pair<NodeId, Slice>> slices;
  std::size_t offset = 0;
  for (const NodeId v : subtree_nodes(tree, u)) {
    if (v >= spaces.size()) {
      throw Error{ErrorCode::kMissingSpace, "node " + std::to_string(v) + " has no space"};
    }
    const std::size_t w = spaces[v].width();
    slices.emplace_back(v, Slice{offset, w});
    offset += w;
  }
  return PathLayout{u, std::move(slices)};
}

LumpedLevels lump_levels(const Tree& tree) {
  const std::size_t levels = tree.height() + 1;
  LumpedLevels out;
  out.groups.resize(levels);
  for (NodeId u = 0; u < tree.size(); ++u) {
    out.groups[tree.height() - tree.depth(u)].push_back(u);
  }
  std::vector<std::optional<NodeId>> line_parents(levels);
  for (std::size_t t = 0; t + 1 < levels; ++t) {
    line_parents[t] = static_cast<NodeId>(t + 1);
  }
  out.line = build_tree(line_parents);
  return out;
}

}  // namespace dacsmc
