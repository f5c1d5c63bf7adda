#include "retext/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace retext {

PoolMode pool_mode_from_string(const std::string& s) {
  if (s == "max") return PoolMode::kMax;
  if (s == "average") return PoolMode::kAverage;
  throw std::invalid_argument("unknown pooling mode: " + s);
}

std::string to_string(PoolMode m) {
  return m == PoolMode::kMax ? "max" : "average";
}

namespace {

void relu_inplace(Vec& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

Vec preactivation(const Matrix& w, const Vec& b, const SparseVec& r,
                  const std::vector<Matrix>& vs, const std::vector<Vec>& u) {
  Vec acc = b;
  addmul_sparse(acc, w, r);
  for (std::size_t i = 0; i < vs.size(); ++i) addmul_dense(acc, vs[i], u[i]);
  return acc;
}

}  // namespace

Vec conv_forward(const ConvLayer& layer, const SparseVec& r) {
  Vec acc = preactivation(layer.w, layer.b, r, {}, {});
  relu_inplace(acc);
  return acc;
}

Vec tv_forward(const TvEmbedding& emb, const SparseVec& r) {
  return conv_forward(emb.layer, r);
}

Vec semi_conv_forward(const SemiConvLayer& layer, const SparseVec& r,
                      const std::vector<Vec>& u) {
  if (u.size() != layer.v.size())
    throw std::invalid_argument(
        "semi_conv_forward: expected one u per coupling matrix");
  Vec acc = preactivation(layer.w, layer.b, r, layer.v, u);
  relu_inplace(acc);
  return acc;
}

namespace {

// Ceil-partition: spans of ceil(n/S) regions; trailing spans may be shorter
// or empty.
std::vector<std::pair<int, int>> pool_segments(int n, int num_segments) {
  const int chunk = (n + num_segments - 1) / num_segments;
  std::vector<std::pair<int, int>> spans(num_segments);
  for (int s = 0; s < num_segments; ++s) {
    spans[s] = {std::min(s * chunk, n), std::min((s + 1) * chunk, n)};
  }
  return spans;
}

Vec pool_impl(const std::vector<Vec>& vectors, PoolMode mode,
              const std::vector<std::pair<int, int>>& spans, int m,
              std::vector<int>* argmax) {
  Vec out(spans.size() * m, 0.0);
  if (argmax) argmax->assign(spans.size() * m, -1);
  for (std::size_t s = 0; s < spans.size(); ++s) {
    auto [b, e] = spans[s];
    if (b == e) continue;
    for (int c = 0; c < m; ++c) {
      const std::size_t f = s * m + c;
      if (mode == PoolMode::kMax) {
        double best = vectors[b][c];
        int best_idx = b;
        for (int i = b + 1; i < e; ++i)
          if (vectors[i][c] > best) {
            best = vectors[i][c];
            best_idx = i;
          }
        out[f] = best;
        if (argmax) (*argmax)[f] = best_idx;
      } else {
        double sum = 0.0;
        for (int i = b; i < e; ++i) sum += vectors[i][c];
        out[f] = sum / (e - b);
      }
    }
  }
  return out;
}

}  // namespace

Vec pool(const std::vector<Vec>& vectors, PoolMode mode, int num_segments) {
  if (vectors.empty()) throw std::invalid_argument("pool: empty sequence");
  if (num_segments < 1)
    throw std::invalid_argument("pool: num_segments must be >= 1");
  const int m = static_cast<int>(vectors.front().size());
  return pool_impl(
      vectors, mode,
      pool_segments(static_cast<int>(vectors.size()), num_segments), m,
      nullptr);
}

Vec response_normalize(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  const double scale = 1.0 / std::sqrt(1.0 + s);
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * scale;
  return out;
}

ModelInput encode_input(const Model& model,
                        const std::vector<std::string>& tokens) {
  ModelInput in;
  in.base = encode(tokens, model.vocab);
  in.tv.reserve(model.conv.embeddings.size());
  for (const auto& emb : model.conv.embeddings)
    in.tv.push_back(encode(tokens, emb.vocab));
  return in;
}

PreparedDoc prepare_doc(const Model& model, const ModelInput& input) {
  if (input.tv.size() != model.conv.embeddings.size())
    throw std::invalid_argument(
        "model input does not match attached embeddings");
  for (const auto& seq : input.tv)
    if (seq.size() != input.base.size())
      throw std::invalid_argument(
          "model input encodings disagree on token count");
  for (const auto& emb : model.conv.embeddings)
    if (emb.spec.size != model.spec.size)
      throw std::invalid_argument(
          "attached embedding region size differs from the model's");

  PreparedDoc doc;
  const auto regions = extract_regions(input.base, model.spec);
  doc.region_vecs.reserve(regions.size());
  doc.tv_outs.reserve(regions.size());
  for (const Region& region : regions) {
    doc.region_vecs.push_back(
        vectorize(region, input.base, model.vocab, model.spec));
    std::vector<Vec> outs;
    outs.reserve(model.conv.embeddings.size());
    for (std::size_t i = 0; i < model.conv.embeddings.size(); ++i) {
      const auto& emb = model.conv.embeddings[i];
      outs.push_back(tv_forward(
          emb, vectorize(region, input.tv[i], emb.vocab, emb.spec)));
    }
    doc.tv_outs.push_back(std::move(outs));
  }
  return doc;
}

Vec forward_prepared(const Model& model, const PreparedDoc& doc,
                     ForwardCache* cache, const Vec* dropout_mask) {
  if (doc.region_vecs.empty())
    throw std::invalid_argument("forward: document has no regions");
  const int m = model.conv.neurons();
  const std::size_t n = doc.num_regions();

  std::vector<Vec> preact(n), normed(n);
  for (std::size_t l = 0; l < n; ++l) {
    preact[l] = preactivation(model.conv.w, model.conv.b, doc.region_vecs[l],
                              model.conv.v, doc.tv_outs[l]);
    Vec z = preact[l];
    relu_inplace(z);
    normed[l] = model.response_norm ? response_normalize(z) : std::move(z);
  }

  auto spans = pool_segments(static_cast<int>(n), model.pooling.num_segments);
  std::vector<int> argmax;
  Vec pooled =
      pool_impl(normed, model.pooling.mode, spans, m,
                model.pooling.mode == PoolMode::kMax ? &argmax : nullptr);
  if (dropout_mask) {
    if (dropout_mask->size() != pooled.size())
      throw std::invalid_argument("dropout mask size mismatch");
    for (std::size_t i = 0; i < pooled.size(); ++i)
      pooled[i] *= (*dropout_mask)[i];
  }

  Vec scores = model.top.b;
  addmul_dense(scores, model.top.w, pooled);

  if (cache) {
    cache->preact = std::move(preact);
    cache->normed = std::move(normed);
    cache->segments = std::move(spans);
    cache->pool_argmax = std::move(argmax);
    cache->pooled = pooled;
    cache->scores = scores;
  }
  return scores;
}

Vec forward(const Model& model, const ModelInput& input, ForwardCache* cache) {
  PreparedDoc prepared = prepare_doc(model, input);
  if (!cache) return forward_prepared(model, prepared, nullptr, nullptr);
  cache->prepared = std::move(prepared);
  return forward_prepared(model, cache->prepared, cache, nullptr);
}

Gradients zero_gradients(const Model& model) {
  Gradients g;
  g.w = Matrix(model.conv.w.rows(), model.conv.w.cols());
  g.v.reserve(model.conv.v.size());
  for (const auto& v : model.conv.v) g.v.emplace_back(v.rows(), v.cols());
  g.b.assign(model.conv.b.size(), 0.0);
  g.top_w = Matrix(model.top.w.rows(), model.top.w.cols());
  g.top_b.assign(model.top.b.size(), 0.0);
  return g;
}

DocGrad backward_doc(const Model& model, const ForwardCache& cache,
                     const Vec& dscores, const Vec* dropout_mask) {
  const int m = model.conv.neurons();
  const std::size_t n = cache.normed.size();
  if (cache.preact.size() != n || n == 0 ||
      cache.pooled.size() != static_cast<std::size_t>(model.feature_dim()) ||
      dscores.size() != model.top.b.size())
    throw std::invalid_argument("backward: cache does not match model/forward");

  DocGrad g;
  g.dscores = dscores;
  g.pooled = cache.pooled;

  Vec dpooled(model.feature_dim(), 0.0);
  for (int c = 0; c < model.top.w.rows(); ++c) {
    const double gc = dscores[c];
    const double* row = model.top.w.row(c);
    for (int f = 0; f < model.feature_dim(); ++f) dpooled[f] += gc * row[f];
  }
  if (dropout_mask)
    for (std::size_t f = 0; f < dpooled.size(); ++f)
      dpooled[f] *= (*dropout_mask)[f];

  // Unpool.
  std::vector<Vec> dnormed(n, Vec(m, 0.0));
  for (std::size_t s = 0; s < cache.segments.size(); ++s) {
    auto [b, e] = cache.segments[s];
    if (b == e) continue;
    for (int c = 0; c < m; ++c) {
      const std::size_t f = s * m + c;
      if (model.pooling.mode == PoolMode::kMax) {
        dnormed[cache.pool_argmax[f]][c] += dpooled[f];
      } else {
        const double share = dpooled[f] / (e - b);
        for (int i = b; i < e; ++i) dnormed[i][c] += share;
      }
    }
  }

  // Normalization jacobian, then the rectifier subgradient (0 at 0).
  g.da.assign(n, Vec(m, 0.0));
  Vec z(m);
  for (std::size_t l = 0; l < n; ++l) {
    Vec& da = g.da[l];
    if (model.response_norm) {
      double s = 0.0, zdot = 0.0;
      for (int c = 0; c < m; ++c) {
        const double a = cache.preact[l][c];
        z[c] = a > 0.0 ? a : 0.0;
        s += z[c] * z[c];
      }
      const double alpha = 1.0 / std::sqrt(1.0 + s);
      for (int c = 0; c < m; ++c) zdot += z[c] * dnormed[l][c];
      const double a3 = alpha * alpha * alpha;
      for (int c = 0; c < m; ++c)
        da[c] = alpha * dnormed[l][c] - a3 * zdot * z[c];
    } else {
      da = dnormed[l];
    }
    for (int c = 0; c < m; ++c)
      if (!(cache.preact[l][c] > 0.0)) da[c] = 0.0;
  }
  return g;
}

void scatter_doc_grad(const Model& model, const PreparedDoc& doc,
                      const DocGrad& g, Gradients& acc) {
  if (g.da.size() != doc.num_regions())
    throw std::invalid_argument("scatter_doc_grad: region count mismatch");
  for (int c = 0; c < model.top.w.rows(); ++c) {
    const double gc = g.dscores[c];
    acc.top_b[c] += gc;
    double* row = acc.top_w.row(c);
    for (int f = 0; f < model.top.w.cols(); ++f) row[f] += gc * g.pooled[f];
  }
  const int m = model.conv.neurons();
  for (std::size_t l = 0; l < doc.num_regions(); ++l) {
    for (int c = 0; c < m; ++c) {
      const double gc = g.da[l][c];
      if (gc == 0.0) continue;
      acc.b[c] += gc;
      double* wrow = acc.w.row(c);
      for (const auto& [j, v] : doc.region_vecs[l].pairs) wrow[j] += gc * v;
      for (std::size_t i = 0; i < acc.v.size(); ++i) {
        double* vrow = acc.v[i].row(c);
        const Vec& u = doc.tv_outs[l][i];
        for (std::size_t j = 0; j < u.size(); ++j) vrow[j] += gc * u[j];
      }
    }
  }
}

Gradients backward(const Model& model, const ModelInput& input,
                   const Vec& target, const ForwardCache& cache) {
  (void)input;
  if (cache.prepared.num_regions() != cache.normed.size())
    throw std::invalid_argument(
        "backward: cache was not produced by forward() for this document");
  if (target.size() != cache.scores.size())
    throw std::invalid_argument("backward: target dimension mismatch");
  Vec dscores(target.size());
  for (std::size_t c = 0; c < target.size(); ++c)
    dscores[c] = 2.0 * (cache.scores[c] - target[c]);
  Gradients acc = zero_gradients(model);
  DocGrad g = backward_doc(model, cache, dscores, nullptr);
  scatter_doc_grad(model, cache.prepared, g, acc);
  return acc;
}

std::vector<int> predict(const Model& model, const ModelInput& input) {
  Vec scores = forward(model, input, nullptr);
  std::vector<int> out;
  if (model.multi_label) {
    for (std::size_t c = 0; c < scores.size(); ++c)
      if (scores[c] > 0.5) out.push_back(static_cast<int>(c));
  } else {
    int best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c)
      if (scores[c] > scores[best]) best = static_cast<int>(c);
    out.push_back(best);
  }
  return out;
}

}  // namespace retext
