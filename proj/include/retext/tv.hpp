#pragma once

#include <memory>
#include <vector>

#include "retext/net.hpp"
#include "retext/region.hpp"
#include "retext/sparse.hpp"
#include "retext/vocab.hpp"

namespace retext {

enum class TargetKind { kUnsupervised, kPartiallySupervised };

// How tv-embedding training targets are built from a region's context.
struct TargetSpec {
  TargetKind kind = TargetKind::kUnsupervised;
  // Unsupervised: context bow over this vocabulary (after vocabulary
  // control). Distinguishing sides doubles the dimension: left context in
  // block [0, |Vt|), right in [|Vt|, 2|Vt|).
  Vocabulary target_vocab;
  bool distinguish_sides = false;
  // Partially supervised: concept activations of this trained model on the
  // context, merged by component-wise max and binarized at > tau. Setting
  // binarize = false regresses on the raw merged activations instead.
  const Model* source = nullptr;
  double tau = 0.0;
  bool binarize = true;

  int dim() const;
};

// Presence indicators of the context words over the target vocabulary.
// doc must be encoded against the target vocabulary (stoplisted and
// out-of-vocabulary words are kOovId and contribute nothing).
SparseVec make_unsupervised_target(const TokenSeq& doc, const Region& region,
                                   const TargetSpec& spec,
                                   const RegionSpec& region_spec);

// Presence indicators of the source model's convolution-layer concepts in
// the context. doc must be encoded against the source model's vocabulary.
SparseVec make_partially_supervised_target(const Model& source,
                                           const TokenSeq& doc,
                                           const Region& region, double tau,
                                           const RegionSpec& region_spec);

// One view-1 region vector paired with its context target.
struct TvTrainExample {
  SparseVec view1;
  SparseVec target;
};

// Encapsulates target construction so the dataset builder can encode each
// document once per vocabulary in play.
class TargetMaker {
 public:
  virtual ~TargetMaker() = default;
  virtual int dim() const = 0;
  // Target for one region of a document given as raw tokens.
  virtual void prepare(const std::vector<std::string>& tokens) = 0;
  virtual SparseVec make(const Region& region) const = 0;
};

std::unique_ptr<TargetMaker> make_target_maker(const TargetSpec& spec,
                                               const RegionSpec& region_spec);

// One example per region per document (regions extracted with padding),
// in document order then offset order. Examples whose target is empty are
// skipped.
std::vector<TvTrainExample> build_tv_dataset(
    const std::vector<std::vector<std::string>>& docs,
    const Vocabulary& view1_vocab, const RegionSpec& embedding_spec,
    TargetMaker& maker);

}  // namespace retext
