#pragma once

#include <string>
#include <vector>

#include "retext/sparse.hpp"
#include "retext/vocab.hpp"

namespace retext {

enum class RegionMode { kSeq, kBow, kBonv };

RegionMode region_mode_from_string(const std::string& s);
std::string to_string(RegionMode m);

// How regions are cut out of a document and turned into vectors.
// size is the number of word positions per region; in bonv mode, n-grams up
// to order bonv_n are looked up in the (n-gram) vocabulary.
struct RegionSpec {
  int size = 1;
  int stride = 1;
  RegionMode mode = RegionMode::kBow;
  int bonv_n = 1;
  bool pad = true;

  void validate() const;
  // Dimension of the vectors this spec produces over the given vocabulary.
  int vec_dim(const Vocabulary& vocab) const {
    return mode == RegionMode::kSeq ? size * vocab.size() : vocab.size();
  }
  bool operator==(const RegionSpec&) const = default;
};

// A fixed-length window into a document. start may lie outside [0, doc len);
// such positions are padding and contribute nothing to any vector.
struct Region {
  int start = 0;
  int len = 0;
};

// Regions at offsets 0, stride, 2*stride, ... With pad the document is
// extended by size-1 virtual positions on each side so every word is
// covered; without pad only fully interior regions are produced. Empty
// documents yield no regions.
std::vector<Region> extract_regions(const TokenSeq& doc,
                                    const RegionSpec& spec);

// seq: position i of an in-vocab word w sets index i*|V| + id(w) to 1.
// bow: occurrence counts per vocabulary word. bonv: counts of all 1..n
// contiguous n-grams of the region found in the vocabulary. OOV and pad
// positions contribute nothing.
SparseVec vectorize(const Region& region, const TokenSeq& doc,
                    const Vocabulary& vocab, const RegionSpec& spec);

// The size-p windows immediately before and after the region. Truncation at
// document boundaries falls out of pad semantics: out-of-range positions are
// padding.
std::pair<Region, Region> context_regions(const TokenSeq& doc,
                                          const Region& region,
                                          const RegionSpec& spec);

}  // namespace retext
