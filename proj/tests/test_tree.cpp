#include <doctest.h>

#include <cmath>
#include <functional>
#include <set>

#include "subq/tree.hpp"

using namespace subq;

namespace {

OutputTable make_table(std::vector<std::vector<int>> rows,
                       std::vector<std::vector<double>> outputs) {
  OutputTable t;
  t.design.B = 0;
  for (const auto& r : rows)
    for (int idx : r) t.design.B = std::max(t.design.B, idx);
  t.design.S = 1;
  t.design.L = static_cast<int>(rows[0].size());
  t.design.rows = std::move(rows);
  t.design.multiplicity.assign(t.design.rows.size(), 1);
  t.design.deduplicated = true;
  t.n = static_cast<int>(outputs[0].size());
  t.outputs = std::move(outputs);
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& row : t.outputs) {
    t.config_means.push_back(mean(row));
    for (double v : row) total += v;
    count += row.size();
  }
  t.grand_mean = total / static_cast<double>(count);
  return t;
}

double weighted_between_ss(const TreeInput& in, const std::vector<int>& rows) {
  double wsum = 0.0, msum = 0.0;
  for (int r : rows) {
    wsum += in.weights[static_cast<std::size_t>(r)];
    msum += in.weights[static_cast<std::size_t>(r)] *
            in.means[static_cast<std::size_t>(r)];
  }
  const double gm = msum / wsum;
  double ss = 0.0;
  for (int r : rows) {
    const double d = in.means[static_cast<std::size_t>(r)] - gm;
    ss += in.weights[static_cast<std::size_t>(r)] * d * d;
  }
  return ss;
}

/// Best split reduction over every feature and every binary level partition.
double exhaustive_best_delta(const TreeInput& in, const std::vector<int>& rows) {
  const double parent_ss = weighted_between_ss(in, rows);
  const int L = static_cast<int>(in.levels[0].size());
  double best = -1.0;
  for (int f = 0; f < L; ++f) {
    std::set<int> levels;
    for (int r : rows)
      levels.insert(in.levels[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)]);
    const std::vector<int> lv(levels.begin(), levels.end());
    const int k = static_cast<int>(lv.size());
    if (k < 2) continue;
    for (unsigned mask = 1; mask < (1u << (k - 1)); ++mask) {
      std::vector<int> left, right;
      for (int r : rows) {
        const int level =
            in.levels[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)];
        const int pos = static_cast<int>(
            std::find(lv.begin(), lv.end(), level) - lv.begin());
        ((mask >> pos) & 1u ? left : right).push_back(r);
      }
      if (left.empty() || right.empty()) continue;
      const double delta = parent_ss - weighted_between_ss(in, left) -
                           weighted_between_ss(in, right);
      best = std::max(best, delta);
    }
  }
  return best;
}

void walk(const TreeNode& node, const std::function<void(const TreeNode&)>& fn) {
  fn(node);
  if (node.left) walk(*node.left, fn);
  if (node.right) walk(*node.right, fn);
}

}  // namespace

TEST_CASE("single configuration gives a leaf root") {
  const auto table = make_table({{1, 1}}, {{3.0, 5.0}});
  const auto root = grow_tree(table);
  CHECK(root->is_leaf());
  CHECK(root->node_mean == doctest::Approx(4.0));
}

TEST_CASE("two configurations split with the two-group identity") {
  const auto table = make_table({{1, 1}, {2, 1}},
                                {{1.0, 2.0, 3.0}, {7.0, 8.0, 9.0}});
  const auto root = grow_tree(table);
  REQUIRE_FALSE(root->is_leaf());
  CHECK(root->split_feature == 0);
  // delta = n * (m1 - m2)^2 / 2 with n = 3
  CHECK(root->delta_tss == doctest::Approx(3.0 * 36.0 / 2.0).epsilon(1e-12));
  const auto report = importance(*root, table);
  CHECK(report.per_submodel[0] == doctest::Approx(root->delta_tss));
  CHECK(report.per_submodel[1] == 0.0);
  CHECK(report.split_counts[1] == 0);
}

TEST_CASE("constant outputs give zero importance and zero aleatoric share") {
  const auto table = make_table({{1, 2}, {2, 1}}, {{5.0, 5.0}, {5.0, 5.0}});
  const auto root = grow_tree(table);
  const auto report = importance(*root, table);
  for (double v : report.per_submodel) CHECK(v == doctest::Approx(0.0));
  CHECK(report.aleatoric == doctest::Approx(0.0));
}

TEST_CASE("identical level tuples are unsplittable") {
  const auto table = make_table({{1, 1}, {1, 1}}, {{1.0, 2.0}, {3.0, 4.0}});
  CHECK_THROWS_AS(grow_tree(table), UnsplittableNode);
}

TEST_CASE("tree identities and split optimality on random small instances") {
  RandomStream root_stream(2718);
  for (int trial = 0; trial < 200; ++trial) {
    RandomStream s = root_stream.derive(static_cast<std::uint64_t>(trial));
    const int L = 1 + static_cast<int>(s.next_u64() % 3);
    const int B = 2 + static_cast<int>(s.next_u64() % 3);  // 2..4
    const int n = 1 + static_cast<int>(s.next_u64() % 5);

    // distinct random level tuples
    std::set<std::vector<int>> rowset;
    const int tuples = static_cast<int>(std::pow(B, L));
    const int target =
        std::min(tuples, 2 + static_cast<int>(s.next_u64() % (2 * B)));
    while (static_cast<int>(rowset.size()) < target) {
      std::vector<int> row;
      for (int l = 0; l < L; ++l)
        row.push_back(1 + static_cast<int>(s.next_u64() % B));
      rowset.insert(row);
    }
    std::vector<std::vector<int>> rows(rowset.begin(), rowset.end());
    std::vector<std::vector<double>> outputs;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::vector<double> reps;
      for (int j = 0; j < n; ++j) reps.push_back(s.next_normal(0.0, 3.0));
      outputs.push_back(reps);
    }
    const auto table = make_table(rows, outputs);
    const auto input = tree_input_from_table(table);
    const auto tree = grow_tree(table);

    // leaf predictions are configuration means
    walk(*tree, [&](const TreeNode& node) {
      if (node.is_leaf()) {
        REQUIRE(node.rows.size() == 1);
        REQUIRE(node.node_mean ==
                doctest::Approx(table.config_means[static_cast<std::size_t>(
                    node.rows[0])]).epsilon(1e-9));
      }
    });

    // TSS = RSS + sum of split reductions (exact telescoping)
    double delta_sum = 0.0;
    walk(*tree, [&](const TreeNode& node) {
      if (!node.is_leaf()) delta_sum += node.delta_tss;
    });
    const auto report = importance(*tree, table);
    REQUIRE(report.tss ==
            doctest::Approx(report.rss + delta_sum).epsilon(1e-9));

    // every realized split matches the exhaustive-partition optimum
    walk(*tree, [&](const TreeNode& node) {
      if (node.is_leaf()) return;
      const double best = exhaustive_best_delta(input, node.rows);
      REQUIRE(node.delta_tss == doctest::Approx(best).epsilon(1e-9));
    });

    // non-negativity
    for (double v : report.per_submodel) REQUIRE(v >= 0.0);
    REQUIRE(report.aleatoric >= 0.0);
  }
}

TEST_CASE("variance decomposition coheres with the output table") {
  RandomStream s(31);
  std::vector<std::vector<int>> rows{{1, 2}, {2, 1}, {1, 1}, {2, 2}};
  std::vector<std::vector<double>> outputs;
  for (int r = 0; r < 4; ++r) {
    std::vector<double> reps;
    for (int j = 0; j < 6; ++j) reps.push_back(s.next_normal(r * 2.0, 1.0));
    outputs.push_back(reps);
  }
  const auto table = make_table(rows, outputs);
  const auto report = importance(*grow_tree(table), table);

  // TSS about the grand mean; RSS = within-configuration SS
  double tss = 0.0, within = 0.0;
  for (std::size_t r = 0; r < table.outputs.size(); ++r)
    for (double v : table.outputs[r]) {
      tss += (v - table.grand_mean) * (v - table.grand_mean);
      within += (v - table.config_means[r]) * (v - table.config_means[r]);
    }
  CHECK(report.tss == doctest::Approx(tss).epsilon(1e-9));
  CHECK(report.rss == doctest::Approx(within).epsilon(1e-9));
  // aleatoric share uses the stated degrees of freedom
  const double dof = 6.0 * 4.0 - 4.0 + 1.0;
  CHECK(report.aleatoric == doctest::Approx(within / dof).epsilon(1e-9));
}

TEST_CASE("bagged importance has the report structure") {
  RandomStream s(41);
  std::vector<std::vector<int>> rows{{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  std::vector<std::vector<double>> outputs;
  for (int r = 0; r < 4; ++r) {
    std::vector<double> reps;
    for (int j = 0; j < 5; ++j)
      reps.push_back(s.next_normal(rows[static_cast<std::size_t>(r)][0] * 4.0, 0.5));
    outputs.push_back(reps);
  }
  const auto table = make_table(rows, outputs);
  const auto report =
      bagged_importance(table, 25, BagWeighting::Uniform, RandomStream(5));
  CHECK(report.kind == ImportanceKind::Bagged);
  CHECK(report.bag_trees == 25);
  REQUIRE(report.per_submodel.size() == 2);
  for (double v : report.per_submodel) CHECK(v >= 0.0);
  // the first submodel drives the response here
  CHECK(report.per_submodel[0] > report.per_submodel[1]);
}

TEST_CASE("variance reduction factors on constructed scores") {
  std::vector<std::vector<double>> single{{1, 2}, {3, 4}, {5, 0}, {2, 2}};
  SUBCASE("identical matrices give ratio one") {
    const auto r = vrf(single, single);
    for (double v : r) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("halving the scores gives ratio four") {
    auto bagged = single;
    for (auto& row : bagged)
      for (double& v : row) v /= 2.0;
    const auto r = vrf(single, bagged);
    for (double v : r) CHECK(v == doctest::Approx(4.0));
  }
  SUBCASE("zero bagged variance reports the infinity sentinel") {
    std::vector<std::vector<double>> bagged{{1, 1}, {1, 1}, {1, 1}, {1, 1}};
    const auto r = vrf(single, bagged);
    for (double v : r) CHECK(std::isinf(v));
  }
}
