#include "retext/tv.hpp"

#include <algorithm>
#include <stdexcept>

namespace retext {

int TargetSpec::dim() const {
  if (kind == TargetKind::kUnsupervised)
    return distinguish_sides ? 2 * target_vocab.size() : target_vocab.size();
  if (!source) throw std::invalid_argument("partially-supervised target has no source model");
  return source->conv.neurons();
}

namespace {

void add_presence(std::vector<std::pair<int, double>>& entries,
                  const TokenSeq& doc, const Region& ctx, int block_offset) {
  for (int i = 0; i < ctx.len; ++i) {
    const int pos = ctx.start + i;
    if (pos < 0 || pos >= doc.size()) continue;
    const int id = doc.ids[pos];
    if (id == kOovId) continue;
    entries.emplace_back(block_offset + id, 1.0);
  }
}

}  // namespace

SparseVec make_unsupervised_target(const TokenSeq& doc, const Region& region,
                                   const TargetSpec& spec,
                                   const RegionSpec& region_spec) {
  if (spec.kind != TargetKind::kUnsupervised)
    throw std::invalid_argument("make_unsupervised_target: wrong target kind");
  const auto [left, right] = context_regions(doc, region, region_spec);
  const int vt = spec.target_vocab.size();
  std::vector<std::pair<int, double>> entries;
  add_presence(entries, doc, left, 0);
  add_presence(entries, doc, right, spec.distinguish_sides ? vt : 0);
  SparseVec out = SparseVec::accumulate(spec.dim(), std::move(entries));
  for (auto& [idx, v] : out.pairs) {
    (void)idx;
    v = 1.0;  // presence, not counts
  }
  return out;
}

namespace {

SparseVec merged_context_activations(const Model& source, const TokenSeq& doc,
                                     const Region& region, double tau,
                                     bool binarize,
                                     const RegionSpec& region_spec) {
  if (source.spec.size != region_spec.size)
    throw std::invalid_argument(
        "source model region size is incompatible with the embedding's");
  const auto [left, right] = context_regions(doc, region, region_spec);
  const ConvLayer layer{source.conv.w, source.conv.b};
  const Vec lo = conv_forward(layer, vectorize(left, doc, source.vocab, source.spec));
  const Vec ro = conv_forward(layer, vectorize(right, doc, source.vocab, source.spec));
  std::vector<std::pair<int, double>> entries;
  for (int c = 0; c < layer.neurons(); ++c) {
    const double a = std::max(lo[c], ro[c]);
    if (a > tau) entries.emplace_back(c, binarize ? 1.0 : a);
  }
  return SparseVec::accumulate(layer.neurons(), std::move(entries));
}

}  // namespace

SparseVec make_partially_supervised_target(const Model& source,
                                           const TokenSeq& doc,
                                           const Region& region, double tau,
                                           const RegionSpec& region_spec) {
  return merged_context_activations(source, doc, region, tau, true,
                                    region_spec);
}

namespace {

class UnsupervisedMaker final : public TargetMaker {
 public:
  UnsupervisedMaker(TargetSpec spec, RegionSpec region_spec)
      : spec_(std::move(spec)), region_spec_(region_spec) {}
  int dim() const override { return spec_.dim(); }
  void prepare(const std::vector<std::string>& tokens) override {
    doc_ = encode(tokens, spec_.target_vocab);
  }
  SparseVec make(const Region& region) const override {
    return make_unsupervised_target(doc_, region, spec_, region_spec_);
  }

 private:
  TargetSpec spec_;
  RegionSpec region_spec_;
  TokenSeq doc_;
};

class PartiallySupervisedMaker final : public TargetMaker {
 public:
  PartiallySupervisedMaker(const Model* source, double tau, bool binarize,
                           RegionSpec region_spec)
      : source_(source),
        tau_(tau),
        binarize_(binarize),
        region_spec_(region_spec) {
    if (!source_)
      throw std::invalid_argument("partially-supervised target has no source model");
  }
  int dim() const override { return source_->conv.neurons(); }
  void prepare(const std::vector<std::string>& tokens) override {
    doc_ = encode(tokens, source_->vocab);
  }
  SparseVec make(const Region& region) const override {
    return merged_context_activations(*source_, doc_, region, tau_, binarize_,
                                      region_spec_);
  }

 private:
  const Model* source_;
  double tau_;
  bool binarize_;
  RegionSpec region_spec_;
  TokenSeq doc_;
};

}  // namespace

std::unique_ptr<TargetMaker> make_target_maker(const TargetSpec& spec,
                                               const RegionSpec& region_spec) {
  if (spec.kind == TargetKind::kUnsupervised)
    return std::make_unique<UnsupervisedMaker>(spec, region_spec);
  return std::make_unique<PartiallySupervisedMaker>(spec.source, spec.tau,
                                                    spec.binarize, region_spec);
}

std::vector<TvTrainExample> build_tv_dataset(
    const std::vector<std::vector<std::string>>& docs,
    const Vocabulary& view1_vocab, const RegionSpec& embedding_spec,
    TargetMaker& maker) {
  RegionSpec spec = embedding_spec;
  spec.pad = true;  // every word participates in embedding training
  std::vector<TvTrainExample> out;
  for (const auto& tokens : docs) {
    const TokenSeq doc = encode(tokens, view1_vocab);
    maker.prepare(tokens);
    for (const Region& region : extract_regions(doc, spec)) {
      SparseVec target = maker.make(region);
      if (target.empty()) continue;
      out.push_back(TvTrainExample{
          vectorize(region, doc, view1_vocab, spec), std::move(target)});
    }
  }
  return out;
}

}  // namespace retext
