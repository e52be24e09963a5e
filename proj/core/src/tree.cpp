#include "subq/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace subq {

namespace {

struct WeightedMean {
  double w = 0.0;
  double wsum = 0.0;  // sum of w * mean
  double mean() const { return wsum / w; }
};

double node_between_ss(const TreeInput& in, const std::vector<int>& rows) {
  WeightedMean total;
  for (int r : rows) {
    total.w += in.weights[static_cast<std::size_t>(r)];
    total.wsum += in.weights[static_cast<std::size_t>(r)] *
                  in.means[static_cast<std::size_t>(r)];
  }
  const double m = total.mean();
  double ss = 0.0;
  for (int r : rows) {
    const double d = in.means[static_cast<std::size_t>(r)] - m;
    ss += in.weights[static_cast<std::size_t>(r)] * d * d;
  }
  return ss;
}

struct BestSplit {
  double delta = -1.0;
  int feature = -1;
  std::vector<int> left_levels;
};

void find_best_split(const TreeInput& in, const std::vector<int>& rows,
                     BestSplit& best) {
  const int L = static_cast<int>(in.levels.front().size());
  for (int l = 0; l < L; ++l) {
    // node-local level statistics
    std::map<int, WeightedMean> levels;
    for (int r : rows) {
      auto& st = levels[in.levels[static_cast<std::size_t>(r)][static_cast<std::size_t>(l)]];
      st.w += in.weights[static_cast<std::size_t>(r)];
      st.wsum += in.weights[static_cast<std::size_t>(r)] *
                 in.means[static_cast<std::size_t>(r)];
    }
    if (levels.size() < 2) continue;

    // order levels by node-local mean (ties by level index via stable sort)
    std::vector<std::pair<int, WeightedMean>> ordered(levels.begin(), levels.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) {
                       return a.second.mean() < b.second.mean();
                     });

    double total_w = 0.0, total_wsum = 0.0;
    for (const auto& [lvl, st] : ordered) {
      total_w += st.w;
      total_wsum += st.wsum;
    }

    // contiguous prefixes in mean order; smallest prefix first so equal
    // deltas keep the smaller left subset
    double left_w = 0.0, left_wsum = 0.0;
    for (std::size_t k = 0; k + 1 < ordered.size(); ++k) {
      left_w += ordered[k].second.w;
      left_wsum += ordered[k].second.wsum;
      const double right_w = total_w - left_w;
      const double diff = left_wsum / left_w - (total_wsum - left_wsum) / right_w;
      const double delta = left_w * right_w / total_w * diff * diff;
      if (delta > best.delta) {
        best.delta = delta;
        best.feature = l;
        best.left_levels.clear();
        for (std::size_t i = 0; i <= k; ++i)
          best.left_levels.push_back(ordered[i].first);
        std::sort(best.left_levels.begin(), best.left_levels.end());
      }
    }
  }
}

std::unique_ptr<TreeNode> grow(const TreeInput& in, std::vector<int> rows) {
  auto node = std::make_unique<TreeNode>();
  node->rows = std::move(rows);

  WeightedMean total;
  for (int r : node->rows) {
    total.w += in.weights[static_cast<std::size_t>(r)];
    total.wsum += in.weights[static_cast<std::size_t>(r)] *
                  in.means[static_cast<std::size_t>(r)];
  }
  node->node_mean = total.mean();
  node->node_ss = node_between_ss(in, node->rows);

  if (node->rows.size() == 1) return node;

  BestSplit best;
  find_best_split(in, node->rows, best);
  if (best.feature < 0)
    throw UnsplittableNode(
        "grow_tree: distinct configurations share all submodel levels");

  std::vector<int> left_rows, right_rows;
  for (int r : node->rows) {
    const int lvl =
        in.levels[static_cast<std::size_t>(r)][static_cast<std::size_t>(best.feature)];
    if (std::binary_search(best.left_levels.begin(), best.left_levels.end(), lvl))
      left_rows.push_back(r);
    else
      right_rows.push_back(r);
  }

  node->split_feature = best.feature;
  node->left_levels = best.left_levels;
  node->left = grow(in, std::move(left_rows));
  node->right = grow(in, std::move(right_rows));
  node->delta_tss = node->node_ss - node->left->node_ss - node->right->node_ss;
  return node;
}

void accumulate_importance(const TreeNode& node, std::vector<double>& sums,
                           std::vector<int>& counts) {
  if (node.is_leaf()) return;
  sums[static_cast<std::size_t>(node.split_feature)] += node.delta_tss;
  counts[static_cast<std::size_t>(node.split_feature)] += 1;
  accumulate_importance(*node.left, sums, counts);
  accumulate_importance(*node.right, sums, counts);
}

}  // namespace

TreeInput tree_input_from_table(const OutputTable& table) {
  TreeInput in;
  in.levels = table.design.rows;
  in.means = table.config_means;
  in.weights.reserve(table.outputs.size());
  for (std::size_t r = 0; r < table.outputs.size(); ++r) {
    in.weights.push_back(static_cast<double>(table.outputs[r].size()));
    for (double y : table.outputs[r]) {
      const double d = y - table.config_means[r];
      in.within_ss += d * d;
    }
  }
  return in;
}

std::unique_ptr<TreeNode> grow_tree(const TreeInput& input) {
  std::vector<int> rows(input.means.size());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = static_cast<int>(r);
  return grow(input, std::move(rows));
}

std::unique_ptr<TreeNode> grow_tree(const OutputTable& table) {
  return grow_tree(tree_input_from_table(table));
}

ImportanceReport importance(const TreeNode& root, const TreeInput& input) {
  const auto L = input.levels.front().size();
  ImportanceReport rep;
  rep.per_submodel.assign(L, 0.0);
  rep.split_counts.assign(L, 0);

  std::vector<double> sums(L, 0.0);
  accumulate_importance(root, sums, rep.split_counts);
  for (std::size_t l = 0; l < L; ++l)
    if (rep.split_counts[l] > 0)
      rep.per_submodel[l] = sums[l] / rep.split_counts[l];

  rep.rss = input.within_ss;
  rep.tss = input.within_ss + root.node_ss;
  double n_total = 0.0;
  for (double w : input.weights) n_total += w;
  const double configs = static_cast<double>(input.means.size());
  rep.aleatoric = rep.rss / (n_total - configs + 1.0);
  return rep;
}

ImportanceReport importance(const TreeNode& root, const OutputTable& table) {
  return importance(root, tree_input_from_table(table));
}

ImportanceReport bagged_importance(const OutputTable& table, int T,
                                   BagWeighting weighting, RandomStream stream) {
  if (T < 1) throw SubqError("bagged_importance: T must be >= 1");
  const std::size_t configs = table.outputs.size();
  const auto L = static_cast<std::size_t>(table.design.L);

  // flattened (config, replication) view
  std::vector<std::pair<int, double>> rows;
  for (std::size_t r = 0; r < configs; ++r)
    for (double y : table.outputs[r]) rows.emplace_back(static_cast<int>(r), y);
  const std::size_t N = rows.size();

  ImportanceReport agg;
  agg.per_submodel.assign(L, 0.0);
  agg.split_counts.assign(L, 0);
  agg.kind = ImportanceKind::Bagged;
  agg.bag_trees = T;
  agg.bag_weighting = weighting;

  double weight_total = 0.0;
  for (int t = 0; t < T; ++t) {
    RandomStream tstream = stream.derive(static_cast<std::uint64_t>(t));
    std::vector<double> sums(configs, 0.0), sqsums(configs, 0.0);
    std::vector<double> counts(configs, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const auto pick = static_cast<std::size_t>(tstream.next_uniform() *
                                                 static_cast<double>(N));
      const auto& [cfg, y] = rows[pick];
      sums[static_cast<std::size_t>(cfg)] += y;
      sqsums[static_cast<std::size_t>(cfg)] += y * y;
      counts[static_cast<std::size_t>(cfg)] += 1.0;
      total += y;
    }

    TreeInput in;
    double within = 0.0;
    for (std::size_t r = 0; r < configs; ++r) {
      if (counts[r] == 0.0) continue;  // configuration dropped for this tree
      const double m = sums[r] / counts[r];
      in.levels.push_back(table.design.rows[r]);
      in.means.push_back(m);
      in.weights.push_back(counts[r]);
      within += sqsums[r] - counts[r] * m * m;
    }
    in.within_ss = std::max(0.0, within);

    auto root = grow_tree(in);
    ImportanceReport rep = importance(*root, in);

    const double w = weighting == BagWeighting::TssWeighted ? rep.tss : 1.0;
    weight_total += w;
    for (std::size_t l = 0; l < L; ++l) {
      agg.per_submodel[l] += w * rep.per_submodel[l];
      agg.split_counts[l] += rep.split_counts[l];
    }
    agg.aleatoric += w * rep.aleatoric;
    agg.tss += rep.tss;  // plain mean, used as the state weight downstream
    agg.rss += rep.rss;
  }

  for (std::size_t l = 0; l < L; ++l) agg.per_submodel[l] /= weight_total;
  agg.aleatoric /= weight_total;
  agg.tss /= static_cast<double>(T);
  agg.rss /= static_cast<double>(T);
  return agg;
}

std::vector<double> vrf(const std::vector<std::vector<double>>& single_scores,
                        const std::vector<std::vector<double>>& bagged_scores) {
  if (single_scores.size() < 2 || single_scores.size() != bagged_scores.size())
    throw SubqError("vrf: need >= 2 macro-replications of both score sets");
  const std::size_t L = single_scores.front().size();
  std::vector<double> out(L);
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> s, b;
    for (std::size_t m = 0; m < single_scores.size(); ++m) {
      s.push_back(single_scores[m][l]);
      b.push_back(bagged_scores[m][l]);
    }
    const double vs = sample_variance(s);
    const double vb = sample_variance(b);
    out[l] = vb == 0.0 ? std::numeric_limits<double>::infinity() : vs / vb;
  }
  return out;
}

}  // namespace subq
