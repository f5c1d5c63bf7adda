#pragma once

#include <string>
#include <vector>

#include "retext/matrix.hpp"
#include "retext/region.hpp"
#include "retext/sparse.hpp"
#include "retext/vocab.hpp"

namespace retext {

enum class PoolMode { kMax, kAverage };

PoolMode pool_mode_from_string(const std::string& s);
std::string to_string(PoolMode m);

struct PoolingCfg {
  PoolMode mode = PoolMode::kMax;
  int num_segments = 1;
  bool operator==(const PoolingCfg&) const = default;
};

// Convolution layer: one shared weight row per neuron, rectifier activation.
struct ConvLayer {
  Matrix w;  // m x d
  Vec b;     // m
  int neurons() const { return w.rows(); }
  int input_dim() const { return w.cols(); }
  bool operator==(const ConvLayer&) const = default;
};

// The transferable artifact of embedding learning: a frozen convolution
// layer together with the vocabulary and region spec it was trained with.
// Never receives gradient once attached to a supervised model.
struct TvEmbedding {
  Vocabulary vocab;
  RegionSpec spec;
  ConvLayer layer;
  int neurons() const { return layer.neurons(); }
};

// Convolution layer with extra input channels, one coupling matrix per
// attached frozen embedding.
struct SemiConvLayer {
  Matrix w;               // m x d
  std::vector<Matrix> v;  // v[i]: m x m_Ui
  Vec b;                  // m
  std::vector<TvEmbedding> embeddings;
  int neurons() const { return w.rows(); }
};

struct TopLayer {
  Matrix w;  // classes x feature dim
  Vec b;     // classes
};

struct Model {
  Vocabulary vocab;
  RegionSpec spec;
  PoolingCfg pooling;
  bool response_norm = true;
  bool multi_label = false;
  SemiConvLayer conv;
  TopLayer top;
  std::vector<std::string> labels;

  int feature_dim() const { return conv.neurons() * pooling.num_segments; }
  int num_classes() const { return static_cast<int>(labels.size()); }
};

// sigma(W r + b), rectifier.
Vec conv_forward(const ConvLayer& layer, const SparseVec& r);

// Same functional form with the embedding's frozen parameters.
Vec tv_forward(const TvEmbedding& emb, const SparseVec& r);

// sigma(W r + sum_i V[i] u[i] + b). With no embeddings this degenerates to
// conv_forward, operation for operation.
Vec semi_conv_forward(const SemiConvLayer& layer, const SparseVec& r,
                      const std::vector<Vec>& u);

// Splits the sequence into num_segments contiguous spans of ceil(n/S)
// vectors and reduces each span component-wise. Spans left empty when the
// sequence is shorter than the segment count pool to zero.
Vec pool(const std::vector<Vec>& vectors, PoolMode mode, int num_segments);

// v / sqrt(1 + |v|^2): direction preserved, output norm < 1.
Vec response_normalize(const Vec& v);

// A document encoded once against every vocabulary the model touches: the
// base vocabulary plus each attached embedding's own.
struct ModelInput {
  TokenSeq base;
  std::vector<TokenSeq> tv;
};

ModelInput encode_input(const Model& model,
                        const std::vector<std::string>& tokens);

// Per-document state that is constant across training epochs: region
// vectors and the frozen embeddings' outputs.
struct PreparedDoc {
  std::vector<SparseVec> region_vecs;
  std::vector<std::vector<Vec>> tv_outs;  // [region][embedding]
  std::size_t num_regions() const { return region_vecs.size(); }
};

PreparedDoc prepare_doc(const Model& model, const ModelInput& input);

struct ForwardCache {
  PreparedDoc prepared;  // filled by forward(); trainers keep their own
  std::vector<Vec> preact;                    // W r + sum V u + b
  std::vector<Vec> normed;                    // after rectifier (+ normalization)
  std::vector<std::pair<int, int>> segments;  // [begin, end) region spans
  std::vector<int> pool_argmax;               // per pooled component, max mode
  Vec pooled;                                 // as fed to the top layer
  Vec scores;
};

// Full pipeline: regions -> semi-conv -> (normalize) -> pool -> top layer.
// Throws if the document produces no regions. A dropout mask, when given,
// multiplies the pooled features (training only).
Vec forward(const Model& model, const ModelInput& input, ForwardCache* cache);
Vec forward_prepared(const Model& model, const PreparedDoc& doc,
                     ForwardCache* cache, const Vec* dropout_mask = nullptr);

struct Gradients {
  Matrix w;               // d loss / d conv.w
  std::vector<Matrix> v;  // d loss / d conv.v[i]
  Vec b;
  Matrix top_w;
  Vec top_b;
};

Gradients zero_gradients(const Model& model);

// Dense per-document gradient pieces, kept factored against the sparse
// region vectors so minibatch reduction can run in a fixed document order.
struct DocGrad {
  std::vector<Vec> da;  // per-region preactivation gradient
  Vec pooled;           // features fed to the top layer
  Vec dscores;
};

DocGrad backward_doc(const Model& model, const ForwardCache& cache,
                     const Vec& dscores, const Vec* dropout_mask);

void scatter_doc_grad(const Model& model, const PreparedDoc& doc,
                      const DocGrad& g, Gradients& acc);

// Exact gradients of sum_c (score_c - target_c)^2 from a forward() cache.
// Frozen embeddings get none; the rectifier subgradient at 0 is 0; max
// pooling routes gradient to the cached argmax (lowest region on ties).
Gradients backward(const Model& model, const ModelInput& input,
                   const Vec& target, const ForwardCache& cache);

// Single-label: argmax score, lowest label id on ties. Multi-label: every
// label with score > 0.5.
std::vector<int> predict(const Model& model, const ModelInput& input);

}  // namespace retext
