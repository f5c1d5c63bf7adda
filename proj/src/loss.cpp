#include "retext/loss.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace retext {

double weighted_square_loss(const std::vector<double>& p, const SparseVec& z,
                            const SparseVec& alpha) {
  if (z.dim != alpha.dim || static_cast<int>(p.size()) != z.dim)
    throw std::invalid_argument("weighted_square_loss: dimension mismatch");
  double loss = 0.0;
  std::size_t zi = 0;
  for (const auto& [j, w] : alpha.pairs) {
    while (zi < z.pairs.size() && z.pairs[zi].first < j) ++zi;
    const double zj =
        (zi < z.pairs.size() && z.pairs[zi].first == j) ? z.pairs[zi].second : 0.0;
    const double d = zj - p[j];
    loss += w * d * d;
  }
  return loss;
}

SparseVec sample_weights(const SparseVec& z, const NegSampleCfg& cfg, Rng& rng) {
  if (cfg.negatives_per_positive < 0 || cfg.positive_weight <= 0.0)
    throw std::invalid_argument("sample_weights: bad configuration");
  const int dim = z.dim;
  const int support = static_cast<int>(z.pairs.size());
  const long virtual_pos = support > 0 ? support : 1;
  const long want =
      std::min<long>(static_cast<long>(cfg.negatives_per_positive) * virtual_pos,
                     dim - support);

  std::vector<std::pair<int, double>> entries;
  entries.reserve(support + want);
  for (const auto& [j, v] : z.pairs) {
    (void)v;
    entries.emplace_back(j, cfg.positive_weight);
  }

  if (want > 0) {
    if (want * 4 >= dim) {
      // Dense complement + partial Fisher-Yates when a large share is drawn.
      std::vector<int> pool;
      pool.reserve(dim - support);
      std::size_t zi = 0;
      for (int j = 0; j < dim; ++j) {
        if (zi < z.pairs.size() && z.pairs[zi].first == j) {
          ++zi;
          continue;
        }
        pool.push_back(j);
      }
      for (long i = 0; i < want; ++i) {
        const std::uint32_t j =
            i + rng.index(static_cast<std::uint32_t>(pool.size() - i));
        std::swap(pool[i], pool[j]);
        entries.emplace_back(pool[i], 1.0);
      }
    } else {
      std::unordered_set<int> picked;
      picked.reserve(want * 2);
      while (static_cast<long>(picked.size()) < want) {
        const int j = static_cast<int>(rng.index(static_cast<std::uint32_t>(dim)));
        if (z.at(j) != 0.0 || !picked.insert(j).second) continue;
        entries.emplace_back(j, 1.0);
      }
    }
  }
  return SparseVec::accumulate(dim, std::move(entries));
}

}  // namespace retext
