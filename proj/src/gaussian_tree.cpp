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


#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>

#include "dacsmc/error.hpp"
#include "dacsmc/models.hpp"

namespace dacsmc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Tree complete_tree(std::size_t depth, std::size_t branching) {
  std::size_t nodes = 0;
  std::size_t level = 1;
  for (std::size_t d = 0; d <= depth; ++d) {
    nodes += level;
    level *= branching;
    require(nodes <= 4096, ErrorCode::kTooLarge, "Gaussian tree has too many nodes");
  }
  std::vector<std::optional<NodeId>> parents(nodes);
  for (std::size_t k = 1; k < nodes; ++k) {
    parents[k] = static_cast<NodeId>((k - 1) / branching);
  }
  return build_tree(parents);
}

MatrixXd covariance(const Tree& tree, const GaussianTreeConfig& config) {
  const auto n = static_cast<Eigen::Index>(tree.size());
  MatrixXd b = MatrixXd::Zero(n, n);
  for (NodeId u = 0; u < tree.size(); ++u) {
    const auto kids = tree.children(u);
    for (const NodeId v : kids) {
      b(u, v) = config.beta / static_cast<double>(kids.size());
    }
  }
  MatrixXd d = MatrixXd::Identity(n, n);
  if (config.correlated) {
    const auto kids = tree.children(tree.root());
    require(kids.size() >= 2, ErrorCode::kInvalidArgument, "the correlated configuration needs two root children");
    d(kids[0], kids[1]) = d(kids[1], kids[0]) = config.correlation;
  }
  // Children have larger ids, so I - B is upper triangular and its inverse keeps exact zeros.
  const MatrixXd identity = MatrixXd::Identity(n, n);
  const MatrixXd a = (identity - b).triangularView<Eigen::Upper>().solve(identity);
  return a * d * a.transpose();
}

MatrixXd select(const MatrixXd& m, const std::vector<NodeId>& rows, const std::vector<NodeId>& cols) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    }
  }
  return out;
}

/// Zero-mean Gaussian log-density with a precomputed precision.
struct GaussianLogDensity {
  MatrixXd precision;
  double log_norm{0.0};

  explicit GaussianLogDensity(const MatrixXd& cov) {
    const Eigen::LLT<MatrixXd> llt{cov};
    require(llt.info() == Eigen::Success, ErrorCode::kInvalidArgument, "covariance is not positive definite");
    precision = llt.solve(MatrixXd::Identity(cov.rows(), cov.cols()));
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    log_norm = -0.5 * (static_cast<double>(cov.rows()) * std::log(2.0 * std::numbers::pi) + log_det);
  }

  [[nodiscard]] double operator()(PathView x) const {
    const Eigen::Map<const VectorXd> v{x.data(), static_cast<Eigen::Index>(x.size())};
    return log_norm - 0.5 * v.dot(precision * v);
  }
};

}  // namespace

std::vector<double> gaussian_tree_covariance(const GaussianTreeConfig& config) {
  const Tree tree = complete_tree(config.depth, config.branching);
  const MatrixXd s = covariance(tree, config);
  std::vector<double> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      out[static_cast<std::size_t>(i * s.cols() + j)] = s(i, j);
    }
  }
  return out;
}

ModelSpec gaussian_tree(const GaussianTreeConfig& config) {
  require(config.depth >= 1 && config.branching >= 1, ErrorCode::kInvalidArgument,
          "Gaussian tree needs depth >= 1 and branching >= 1");
  require(std::abs(config.correlation) < 1.0, ErrorCode::kInvalidArgument, "correlation must lie in (-1, 1)");
  const Tree tree = complete_tree(config.depth, config.branching);
  const MatrixXd sigma = covariance(tree, config);
  ModelSpec model{config.correlated ? "gaussian_tree:correlated" : "gaussian_tree:matched", tree,
                  std::vector<NodeSpace>(tree.size(), NodeSpace::continuous(1))};

  auto log_z = std::make_shared<std::vector<double>>(tree.size());
  std::vector<std::shared_ptr<const GaussianLogDensity>> subtree_density(tree.size());
  std::vector<std::vector<NodeId>> members(tree.size());
  for (NodeId u = 0; u < tree.size(); ++u) {
    members[u] = subtree_nodes(tree, u);
    const GaussianLogDensity density{select(sigma, members[u], members[u])};
    // rho_u = exp(-x'P x / 2) so log Z_u = -log_norm.
    (*log_z)[u] = -density.log_norm;
    subtree_density[u] = std::make_shared<const GaussianLogDensity>(density);
  }

  for (NodeId u = 0; u < tree.size(); ++u) {
    // gamma_u is the normalized subtree marginal, so the target weight is the constant Z_u.
    model.target_weights[u] = [lz = (*log_z)[u]](PathView) { return lz; };
    const std::vector<NodeId>& idx = members[u];
    if (tree.is_leaf(u)) {
      const double sd = std::sqrt(sigma(u, u));
      model.leaf_proposals[u] = [sd](RngStream& rng, MutablePathView own) { own[0] = rng.normal(0.0, sd); };
      continue;
    }
    const std::vector<NodeId> below(idx.begin(), idx.end() - 1);
    const MatrixXd s_cc = select(sigma, below, below);
    const MatrixXd s_uc = select(sigma, {u}, below);
    const Eigen::LLT<MatrixXd> llt{s_cc};
    const VectorXd coef = llt.solve(s_uc.transpose());
    const double var = sigma(u, u) - (s_uc * coef)(0, 0);
    require(var > 0, ErrorCode::kInvalidArgument, "degenerate conditional variance at node " + std::to_string(u));
    model.kernels[u] = [coef, sd = std::sqrt(var)](PathView children, RngStream& rng, MutablePathView own) {
      const Eigen::Map<const VectorXd> x{children.data(), static_cast<Eigen::Index>(children.size())};
      own[0] = rng.normal(coef.dot(x), sd);
    };

    // Children subtrees are independent exactly when the cross-blocks vanish.
    const auto slices = model.child_slices(u);
    bool independent = true;
    for (std::size_t i = 0; i < slices.size() && independent; ++i) {
      for (std::size_t j = 0; j < slices.size() && independent; ++j) {
        if (i == j) {
          continue;
        }
        for (std::size_t a = 0; a < slices[i].width && independent; ++a) {
          for (std::size_t b = 0; b < slices[j].width; ++b) {
            if (s_cc(static_cast<Eigen::Index>(slices[i].offset + a), static_cast<Eigen::Index>(slices[j].offset + b)) !=
                0.0) {
              independent = false;
              break;
            }
          }
        }
      }
    }
    if (independent) {
      model.aux_weights[u] =
          FactorizedWeight{std::vector<LogWeightFn>(slices.size(), [](PathView) { return 0.0; })};
      continue;
    }
    auto joint = std::make_shared<const GaussianLogDensity>(s_cc);
    std::vector<std::shared_ptr<const GaussianLogDensity>> parts;
    for (const NodeId v : tree.children(u)) {
      parts.push_back(subtree_density[v]);
    }
    const std::vector<Slice> owned{slices.begin(), slices.end()};
    model.aux_weights[u] = GeneralWeight{[joint, parts, owned](PathView x) {
      double w = (*joint)(x);
      for (std::size_t j = 0; j < parts.size(); ++j) {
        w -= (*parts[j])(x.subspan(owned[j].offset, owned[j].width));
      }
      return w;
    }};
  }

  const NodeId root = tree.root();
  const double threshold = config.threshold;
  model.test_functions.push_back(TestFunction{
      root, "root_above", [threshold](PathView p) { return p.back() > threshold ? 1.0 : 0.0; }, 1.0});

  auto variances = std::make_shared<std::vector<double>>(tree.size());
  for (NodeId u = 0; u < tree.size(); ++u) {
    (*variances)[u] = sigma(u, u);
  }
  auto oracle = std::make_shared<Oracle>();
  oracle->method = OracleMethod::kConjugateAnalytic;
  oracle->log_z = [log_z](NodeId u) { return log_z->at(u); };
  oracle->expectation = [variances, threshold](const TestFunction& f) {
    require(f.name == "root_above", ErrorCode::kNoOracle, "no closed form for test function '" + f.name + "'");
    return 0.5 * std::erfc(threshold / std::sqrt(2.0 * variances->at(f.node)));
  };
  model.oracle = std::move(oracle);
  return model;
}

}  // namespace dacsmc
