#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace retext {

// Sparse vector: dimension plus (index, value) pairs with strictly increasing
// indices and no stored zeros. This is the representation of every region
// vector and training target.
struct SparseVec {
  int dim = 0;
  std::vector<std::pair<int, double>> pairs;

  SparseVec() = default;
  explicit SparseVec(int d) : dim(d) {}

  bool empty() const { return pairs.empty(); }
  std::size_t nnz() const { return pairs.size(); }

  double at(int idx) const {
    auto it = std::lower_bound(
        pairs.begin(), pairs.end(), idx,
        [](const std::pair<int, double>& p, int i) { return p.first < i; });
    if (it != pairs.end() && it->first == idx) return it->second;
    return 0.0;
  }

  bool operator==(const SparseVec& o) const = default;

  // Builds a SparseVec from possibly duplicated, unsorted entries:
  // duplicates are summed, exact zeros dropped.
  static SparseVec accumulate(int dim,
                              std::vector<std::pair<int, double>> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseVec out(dim);
    for (const auto& [idx, val] : entries) {
      if (idx < 0 || idx >= dim)
        throw std::invalid_argument("SparseVec: index out of range");
      if (!out.pairs.empty() && out.pairs.back().first == idx)
        out.pairs.back().second += val;
      else
        out.pairs.emplace_back(idx, val);
    }
    std::erase_if(out.pairs, [](const auto& p) { return p.second == 0.0; });
    return out;
  }
};

// Component-wise sum of two sparse vectors of equal dimension.
inline SparseVec sparse_add(const SparseVec& a, const SparseVec& b) {
  if (a.dim != b.dim)
    throw std::invalid_argument("sparse_add: dimension mismatch");
  SparseVec out(a.dim);
  std::size_t i = 0, j = 0;
  while (i < a.pairs.size() || j < b.pairs.size()) {
    if (j == b.pairs.size() ||
        (i < a.pairs.size() && a.pairs[i].first < b.pairs[j].first)) {
      out.pairs.push_back(a.pairs[i++]);
    } else if (i == a.pairs.size() || b.pairs[j].first < a.pairs[i].first) {
      out.pairs.push_back(b.pairs[j++]);
    } else {
      double v = a.pairs[i].second + b.pairs[j].second;
      if (v != 0.0) out.pairs.emplace_back(a.pairs[i].first, v);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace retext
