#include "subq/design.hpp"

#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace subq {

std::vector<std::vector<int>> latin_stack(int B, int L, RandomStream& stream) {
  if (B < 1 || L < 1)
    throw std::invalid_argument("latin_stack: B and L must be >= 1");
  std::vector<std::vector<int>> block(
      static_cast<std::size_t>(B), std::vector<int>(static_cast<std::size_t>(L)));
  for (int l = 0; l < L; ++l) {
    std::vector<int> perm(static_cast<std::size_t>(B));
    std::iota(perm.begin(), perm.end(), 1);
    for (int i = B - 1; i > 0; --i) {
      const auto j = static_cast<int>(stream.next_uniform() * (i + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    for (int b = 0; b < B; ++b)
      block[static_cast<std::size_t>(b)][static_cast<std::size_t>(l)] =
          perm[static_cast<std::size_t>(b)];
  }
  return block;
}

DesignMatrix stacked_design(int B, int S, int L, RandomStream stream) {
  if (S < 1) throw std::invalid_argument("stacked_design: S must be >= 1");
  DesignMatrix d;
  d.B = B;
  d.S = S;
  d.L = L;
  d.seed = stream.root_seed();
  d.rows.reserve(static_cast<std::size_t>(B) * static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    RandomStream block_stream = stream.derive(static_cast<std::uint64_t>(s));
    auto block = latin_stack(B, L, block_stream);
    for (auto& row : block) d.rows.push_back(std::move(row));
  }
  d.multiplicity.assign(d.rows.size(), 1);
  return d;
}

DesignMatrix deduplicate(const DesignMatrix& design) {
  DesignMatrix out;
  out.B = design.B;
  out.S = design.S;
  out.L = design.L;
  out.seed = design.seed;
  out.deduplicated = true;
  std::map<std::vector<int>, std::size_t> seen;
  for (std::size_t r = 0; r < design.rows.size(); ++r) {
    auto [it, inserted] = seen.try_emplace(design.rows[r], out.rows.size());
    if (inserted) {
      out.rows.push_back(design.rows[r]);
      out.multiplicity.push_back(design.multiplicity[r]);
    } else {
      out.multiplicity[it->second] += design.multiplicity[r];
    }
  }
  return out;
}

std::string design_to_csv(const DesignMatrix& design) {
  std::ostringstream os;
  os << "config";
  for (int l = 1; l <= design.L; ++l) os << ",submodel_" << l;
  os << ",multiplicity\n";
  for (std::size_t r = 0; r < design.rows.size(); ++r) {
    os << (r + 1);
    for (int v : design.rows[r]) os << ',' << v;
    os << ',' << design.multiplicity[r] << '\n';
  }
  return os.str();
}

}  // namespace subq
