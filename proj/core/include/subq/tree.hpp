#pragma once

#include <memory>
#include <vector>

#include "subq/harness.hpp"
#include "subq/stats.hpp"

namespace subq {

/// Node of a fully-grown regression tree over categorical submodel features.
/// `node_ss` is the replication-weighted between-configuration sum of squares
/// of the configuration means inside the node, so
/// delta_tss = node_ss - (left_ss + right_ss) >= 0 and the split reductions
/// telescope to TSS - RSS.
struct TreeNode {
  std::vector<int> rows;  // configuration indices (0-based)
  int split_feature = -1;              // submodel index (0-based), -1 at leaves
  std::vector<int> left_levels;        // instance indices routed left
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;
  double node_mean = 0.0;
  double node_ss = 0.0;
  double delta_tss = 0.0;

  bool is_leaf() const { return split_feature < 0; }
};

enum class ImportanceKind { SingleTree, Bagged };
enum class BagWeighting { Uniform, TssWeighted };

struct ImportanceReport {
  std::vector<double> per_submodel;  // KPI^2 units; 0 if never split on
  std::vector<int> split_counts;
  double aleatoric = 0.0;  // RSS / (nB' - B' + 1)
  double tss = 0.0;
  double rss = 0.0;
  ImportanceKind kind = ImportanceKind::SingleTree;
  int bag_trees = 0;
  BagWeighting bag_weighting = BagWeighting::Uniform;
};

/// Weighted per-configuration summary used to grow a tree. `weight` is the
/// replication count behind each mean.
struct TreeInput {
  std::vector<std::vector<int>> levels;  // per config: L instance indices
  std::vector<double> means;
  std::vector<double> weights;
  double within_ss = 0.0;  // residual SS of replications about their config mean
};

TreeInput tree_input_from_table(const OutputTable& table);

/// Grow the tree to purity: best-first binary splits, per feature the levels
/// present are ordered by node-local mean and the best contiguous partition is
/// taken (optimal for squared loss). Requires distinct level tuples per row.
std::unique_ptr<TreeNode> grow_tree(const TreeInput& input);
std::unique_ptr<TreeNode> grow_tree(const OutputTable& table);

ImportanceReport importance(const TreeNode& root, const OutputTable& table);
ImportanceReport importance(const TreeNode& root, const TreeInput& input);

/// Bagging over the (config, replication) rows of the table. Configurations
/// that lose every row in a resample are dropped for that tree.
ImportanceReport bagged_importance(const OutputTable& table, int T,
                                   BagWeighting weighting, RandomStream stream);

/// Per-submodel Var(single) / Var(bagged) across macro-replications; +inf
/// where the bagged variance is exactly 0.
std::vector<double> vrf(const std::vector<std::vector<double>>& single_scores,
                        const std::vector<std::vector<double>>& bagged_scores);

}  // namespace subq
