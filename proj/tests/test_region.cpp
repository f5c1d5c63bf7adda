#include "doctest.h"

#include "retext/region.hpp"
#include "retext/rng.hpp"
#include "support/test_helpers.hpp"

using namespace retext;
using test_support::fixed_vocab;

TEST_SUITE_BEGIN("regions");

namespace {

TokenSeq seq_of(std::vector<int> ids) {
  TokenSeq s;
  s.ids = std::move(ids);
  return s;
}

std::vector<int> real_ids(const Region& r, const TokenSeq& doc) {
  std::vector<int> out;
  for (int i = 0; i < r.len; ++i) {
    const int pos = r.start + i;
    if (pos >= 0 && pos < doc.size() && doc.ids[pos] != kOovId)
      out.push_back(doc.ids[pos]);
  }
  return out;
}

}  // namespace

TEST_CASE("extract_regions offsets") {
  RegionSpec spec;
  spec.size = 2;
  spec.stride = 1;

  SUBCASE("interior only without padding") {
    spec.pad = false;
    const auto rs = extract_regions(seq_of({1, 2, 3}), spec);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].start == 0);
    CHECK(rs[1].start == 1);
  }
  SUBCASE("padding covers every word") {
    spec.pad = true;
    const auto rs = extract_regions(seq_of({1, 2, 3}), spec);
    REQUIRE(rs.size() == 4);
    CHECK(rs[0].start == -1);
    CHECK(rs[1].start == 0);
    CHECK(rs[2].start == 1);
    CHECK(rs[3].start == 2);
  }
  SUBCASE("short document without padding yields nothing") {
    spec.size = 3;
    spec.pad = false;
    CHECK(extract_regions(seq_of({1}), spec).empty());
  }
  SUBCASE("stride skips offsets") {
    spec.pad = false;
    spec.stride = 2;
    const auto rs = extract_regions(seq_of({1, 2, 3, 4, 5}), spec);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].start == 0);
    CHECK(rs[1].start == 2);
  }
  SUBCASE("empty document yields nothing") {
    spec.pad = true;
    CHECK(extract_regions(seq_of({}), spec).empty());
  }
}

TEST_CASE("vectorize reproduces the love-it region vectors") {
  const Vocabulary v = fixed_vocab({"i", "it", "love"});
  const TokenSeq doc = encode({"love", "it"}, v);
  const Region region{0, 2};

  SUBCASE("seq concatenates one-hot blocks") {
    RegionSpec spec{2, 1, RegionMode::kSeq, 1, false};
    const SparseVec x = vectorize(region, doc, v, spec);
    CHECK(x.dim == 6);
    // [0,0,1 | 0,1,0]
    REQUIRE(x.pairs.size() == 2);
    CHECK(x.pairs[0] == std::pair<int, double>{2, 1.0});
    CHECK(x.pairs[1] == std::pair<int, double>{4, 1.0});
  }
  SUBCASE("bow collapses positions") {
    RegionSpec spec{2, 1, RegionMode::kBow, 1, false};
    const SparseVec x = vectorize(region, doc, v, spec);
    CHECK(x.dim == 3);
    // [0,1,1]
    REQUIRE(x.pairs.size() == 2);
    CHECK(x.pairs[0] == std::pair<int, double>{1, 1.0});
    CHECK(x.pairs[1] == std::pair<int, double>{2, 1.0});
  }
  SUBCASE("bow counts repeats") {
    const TokenSeq rep = encode({"it", "it"}, v);
    RegionSpec spec{2, 1, RegionMode::kBow, 1, false};
    const SparseVec x = vectorize(Region{0, 2}, rep, v, spec);
    REQUIRE(x.pairs.size() == 1);
    CHECK(x.pairs[0] == std::pair<int, double>{1, 2.0});
  }
  SUBCASE("pad and OOV positions contribute nothing") {
    const TokenSeq mixed = encode({"love", "zzz"}, v);
    RegionSpec spec{3, 1, RegionMode::kSeq, 1, true};
    const SparseVec x = vectorize(Region{-1, 3}, mixed, v, spec);
    CHECK(x.dim == 9);
    REQUIRE(x.pairs.size() == 1);
    CHECK(x.pairs[0] == std::pair<int, double>{3 + 2, 1.0});  // love at position 1
  }
}

TEST_CASE("vectorize bonv counts region n-grams known to the vocabulary") {
  const std::vector<std::vector<std::string>> docs = {{"love", "it", "now"},
                                                      {"love", "it", "now"}};
  const Vocabulary v = build_vocab(docs, 100, 1, 2);
  const TokenSeq doc = encode({"love", "it", "now"}, v);
  RegionSpec spec{3, 1, RegionMode::kBonv, 2, false};
  const SparseVec x = vectorize(Region{0, 3}, doc, v, spec);
  CHECK(x.dim == v.size());
  CHECK(x.at(v.id("love")) == 1.0);
  CHECK(x.at(v.id("it")) == 1.0);
  CHECK(x.at(v.id("now")) == 1.0);
  CHECK(x.at(v.id("love it")) == 1.0);
  CHECK(x.at(v.id("it now")) == 1.0);
  CHECK(x.nnz() == 5);
}

TEST_CASE("context_regions are the adjacent windows, truncated by the document") {
  const Vocabulary v =
      fixed_vocab({"good", "acting", ",", "fun", "plot", ":)"});
  const TokenSeq doc =
      encode({"good", "acting", ",", "fun", "plot", ":)"}, v);
  RegionSpec spec{3, 1, RegionMode::kBow, 1, true};

  SUBCASE("the ', fun plot' region sees 'good acting' and ':)'") {
    const auto [left, right] = context_regions(doc, Region{2, 3}, spec);
    CHECK(real_ids(left, doc) == std::vector<int>{v.id("good"), v.id("acting")});
    CHECK(real_ids(right, doc) == std::vector<int>{v.id(":)")});
  }
  SUBCASE("document start has an empty left context") {
    const auto [left, right] = context_regions(doc, Region{0, 3}, spec);
    CHECK(real_ids(left, doc).empty());
    CHECK(real_ids(right, doc) == std::vector<int>{v.id("fun"), v.id("plot"), v.id(":)")});
  }
  SUBCASE("document of exactly p words has empty contexts") {
    const TokenSeq three = encode({"good", "acting", ","}, v);
    const auto [left, right] = context_regions(three, Region{0, 3}, spec);
    CHECK(real_ids(left, three).empty());
    CHECK(real_ids(right, three).empty());
  }
}

TEST_CASE("bow equals the position-collapsed seq vector") {
  Rng rng(7);
  const Vocabulary v = fixed_vocab({"a", "b", "c", "d", "e"});
  for (int trial = 0; trial < 30; ++trial) {
    TokenSeq doc;
    const int len = 1 + rng.index(8);
    for (int i = 0; i < len; ++i)
      doc.ids.push_back(rng.unit() < 0.15 ? kOovId : static_cast<int>(rng.index(5)));
    RegionSpec seq_spec{3, 1, RegionMode::kSeq, 1, true};
    RegionSpec bow_spec{3, 1, RegionMode::kBow, 1, true};
    for (const Region& r : extract_regions(doc, seq_spec)) {
      const SparseVec xs = vectorize(r, doc, v, seq_spec);
      const SparseVec xb = vectorize(r, doc, v, bow_spec);
      CHECK(xs.nnz() <= 3);
      CHECK(xb.nnz() <= 3);
      for (int w = 0; w < v.size(); ++w) {
        double collapsed = 0.0;
        for (int p = 0; p < 3; ++p) collapsed += xs.at(p * v.size() + w);
        CHECK(xb.at(w) == collapsed);
      }
    }
  }
}

TEST_SUITE_END();
