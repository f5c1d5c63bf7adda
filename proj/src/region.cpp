#include "retext/region.hpp"

#include <stdexcept>

namespace retext {

RegionMode region_mode_from_string(const std::string& s) {
  if (s == "seq") return RegionMode::kSeq;
  if (s == "bow") return RegionMode::kBow;
  if (s == "bonv") return RegionMode::kBonv;
  throw std::invalid_argument("unknown region mode: " + s);
}

std::string to_string(RegionMode m) {
  switch (m) {
    case RegionMode::kSeq: return "seq";
    case RegionMode::kBow: return "bow";
    case RegionMode::kBonv: return "bonv";
  }
  throw std::logic_error("bad RegionMode");
}

void RegionSpec::validate() const {
  if (size < 1) throw std::invalid_argument("region size must be >= 1");
  if (stride < 1) throw std::invalid_argument("region stride must be >= 1");
  if (mode == RegionMode::kBonv && (bonv_n < 1 || bonv_n > size))
    throw std::invalid_argument("bonv order must be in [1, region size]");
}

std::vector<Region> extract_regions(const TokenSeq& doc,
                                    const RegionSpec& spec) {
  spec.validate();
  std::vector<Region> out;
  const int len = doc.size();
  if (len == 0) return out;
  const int first = spec.pad ? -(spec.size - 1) : 0;
  const int last = spec.pad ? len - 1 : len - spec.size;
  for (int off = first; off <= last; off += spec.stride)
    out.push_back(Region{off, spec.size});
  return out;
}

SparseVec vectorize(const Region& region, const TokenSeq& doc,
                    const Vocabulary& vocab, const RegionSpec& spec) {
  const int len = doc.size();
  const int v = vocab.size();
  std::vector<std::pair<int, double>> entries;

  if (spec.mode == RegionMode::kSeq || spec.mode == RegionMode::kBow) {
    for (int i = 0; i < region.len; ++i) {
      const int pos = region.start + i;
      if (pos < 0 || pos >= len) continue;
      const int id = doc.ids[pos];
      if (id == kOovId) continue;
      entries.emplace_back(
          spec.mode == RegionMode::kSeq ? i * v + id : id, 1.0);
    }
    return SparseVec::accumulate(
        spec.mode == RegionMode::kSeq ? region.len * v : v, entries);
  }

  // bonv: form each contiguous window's token string from the vocabulary
  // entries of its word ids. Windows touching a pad or OOV position cannot
  // be formed and contribute nothing.
  std::string key;
  for (int i = 0; i < region.len; ++i) {
    key.clear();
    for (int n = 1; n <= spec.bonv_n && i + n <= region.len; ++n) {
      const int pos = region.start + n - 1 + i;
      if (pos < 0 || pos >= len || doc.ids[pos] == kOovId) break;
      if (n > 1) key.push_back(kNgramSep);
      key += vocab.token(doc.ids[pos]);
      const int id = n == 1 ? doc.ids[pos] : vocab.id(key);
      if (id != kOovId) entries.emplace_back(id, 1.0);
    }
  }
  return SparseVec::accumulate(v, entries);
}

std::pair<Region, Region> context_regions(const TokenSeq& doc,
                                          const Region& region,
                                          const RegionSpec& spec) {
  (void)doc;
  const int p = spec.size;
  return {Region{region.start - p, p}, Region{region.start + region.len, p}};
}

}  // namespace retext
