#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "subq/design.hpp"

using namespace subq;

TEST_CASE("single-instance design is the all-ones row") {
  RandomStream s(1);
  const auto block = latin_stack(1, 3, s);
  REQUIRE(block.size() == 1);
  CHECK(block[0] == std::vector<int>{1, 1, 1});
}

TEST_CASE("each column of a block is a permutation") {
  RandomStream s(2);
  const auto block = latin_stack(4, 2, s);
  for (int col = 0; col < 2; ++col) {
    std::vector<int> v;
    for (const auto& row : block) v.push_back(row[static_cast<std::size_t>(col)]);
    std::sort(v.begin(), v.end());
    CHECK(v == std::vector<int>{1, 2, 3, 4});
  }
}

TEST_CASE("permutations are uniform over the symmetric group") {
  std::map<std::vector<int>, int> counts;
  const int trials = 60000;
  RandomStream root(77);
  for (int t = 0; t < trials; ++t) {
    RandomStream s = root.derive(static_cast<std::uint64_t>(t));
    const auto block = latin_stack(3, 1, s);
    std::vector<int> perm{block[0][0], block[1][0], block[2][0]};
    ++counts[perm];
  }
  CHECK(counts.size() == 6);
  for (const auto& [perm, c] : counts)
    CHECK(static_cast<double>(c) / trials ==
          doctest::Approx(1.0 / 6.0).epsilon(0.06));
}

TEST_CASE("stacked designs satisfy the Latin and balance properties") {
  RandomStream root(123);
  for (int trial = 0; trial < 100; ++trial) {
    RandomStream s = root.derive(static_cast<std::uint64_t>(trial));
    const int B = 1 + static_cast<int>(s.next_u64() % 32);
    const int S = 1 + static_cast<int>(s.next_u64() % 16);
    const int L = 1 + static_cast<int>(s.next_u64() % 8);
    const auto design = stacked_design(B, S, L, s.derive(0));

    REQUIRE(design.configurations() == B * S);
    for (int col = 0; col < L; ++col) {
      std::vector<int> total_counts(static_cast<std::size_t>(B) + 1, 0);
      for (int stack = 0; stack < S; ++stack) {
        std::vector<int> v;
        for (int r = stack * B; r < (stack + 1) * B; ++r)
          v.push_back(design.rows[static_cast<std::size_t>(r)]
                                 [static_cast<std::size_t>(col)]);
        std::sort(v.begin(), v.end());
        std::vector<int> expect(static_cast<std::size_t>(B));
        std::iota(expect.begin(), expect.end(), 1);
        REQUIRE(v == expect);  // Latin property per stack
        for (int idx : v) ++total_counts[static_cast<std::size_t>(idx)];
      }
      for (int idx = 1; idx <= B; ++idx)
        REQUIRE(total_counts[static_cast<std::size_t>(idx)] == S);
    }
  }
}

TEST_CASE("identical parameters reproduce the identical design") {
  const auto a = stacked_design(6, 3, 4, RandomStream(9).derive(2));
  const auto b = stacked_design(6, 3, 4, RandomStream(9).derive(2));
  CHECK(a.rows == b.rows);
}

TEST_CASE("deduplication merges repeated rows with multiplicity") {
  SUBCASE("B=1 stacked twice") {
    const auto design = stacked_design(1, 2, 3, RandomStream(4));
    const auto dedup = deduplicate(design);
    REQUIRE(dedup.configurations() == 1);
    CHECK(dedup.multiplicity[0] == 2);
    CHECK(dedup.deduplicated);
  }
  SUBCASE("distinct rows stay unchanged") {
    DesignMatrix d;
    d.B = 2;
    d.S = 1;
    d.L = 1;
    d.rows = {{1}, {2}};
    d.multiplicity = {1, 1};
    const auto dedup = deduplicate(d);
    CHECK(dedup.rows == d.rows);
    CHECK(dedup.multiplicity == std::vector<int>{1, 1});
  }
  SUBCASE("two stacks of B=2 over one submodel") {
    DesignMatrix d;
    d.B = 2;
    d.S = 2;
    d.L = 1;
    d.rows = {{1}, {2}, {2}, {1}};
    d.multiplicity = {1, 1, 1, 1};
    const auto dedup = deduplicate(d);
    REQUIRE(dedup.configurations() == 2);
    CHECK(dedup.multiplicity == std::vector<int>{2, 2});
  }
}

TEST_CASE("design CSV has the documented header") {
  const auto design = stacked_design(2, 1, 3, RandomStream(8));
  const auto csv = design_to_csv(design);
  CHECK(csv.rfind("config,submodel_1,submodel_2,submodel_3,multiplicity\n", 0) == 0);
}
