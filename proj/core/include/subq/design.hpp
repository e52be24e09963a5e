#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subq/random.hpp"

namespace subq {

/// Stacked Latin hypercube design over submodel instance indices (1..B).
/// Before deduplication, rows (s*B)..(s*B + B - 1) of each column are a
/// permutation of 1..B for every stack s.
struct DesignMatrix {
  int B = 0;
  int S = 0;
  int L = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> rows;  // B' rows of L instance indices
  std::vector<int> multiplicity;       // per row; all 1 until deduplicated
  bool deduplicated = false;

  int configurations() const { return static_cast<int>(rows.size()); }
};

/// One Latin hypercube block: each column is an independent uniform random
/// permutation of 1..B (Fisher-Yates from the stream).
std::vector<std::vector<int>> latin_stack(int B, int L, RandomStream& stream);

/// Vertical concatenation of S independent blocks; B' = B*S rows.
DesignMatrix stacked_design(int B, int S, int L, RandomStream stream);

/// Merge identical rows (possible across stacks), accumulating multiplicity.
/// Row order follows first occurrence.
DesignMatrix deduplicate(const DesignMatrix& design);

/// CSV export: header `config,submodel_1..submodel_L,multiplicity`.
std::string design_to_csv(const DesignMatrix& design);

}  // namespace subq
