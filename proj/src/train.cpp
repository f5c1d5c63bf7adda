#include "retext/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <thread>

namespace retext {

void TrainConfig::validate() const {
  if (lr.initial <= 0.0) throw std::invalid_argument("learning rate must be > 0");
  if (lr.decay <= 0.0) throw std::invalid_argument("lr decay must be > 0");
  if (lr.decay_interval < 1) throw std::invalid_argument("lr decay interval must be >= 1");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (minibatch < 1) throw std::invalid_argument("minibatch must be >= 1");
  if (l2 < 0.0) throw std::invalid_argument("l2 must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0, 1)");
  if (neurons < 1) throw std::invalid_argument("neuron count must be >= 1");
  if (pooling.num_segments < 1) throw std::invalid_argument("num_segments must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (vocab_max < 1) throw std::invalid_argument("vocab_max must be >= 1");
  if (vocab_min_count < 1) throw std::invalid_argument("vocab_min_count must be >= 1");
  if (vocab_ngram < 1) throw std::invalid_argument("vocab_ngram must be >= 1");
  spec.validate();
}

namespace {

// Runs fn(0..n) across the given worker count. Each index writes only its
// own output slot, so scheduling order never matters; reductions over the
// slots stay in index order.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  const int t = std::min<std::size_t>(threads, n);
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

void decay_weights(Matrix& w, const Matrix& acc, double inv_batch, double lr,
                   double l2) {
  auto& wd = w.data();
  const auto& ad = acc.data();
  for (std::size_t i = 0; i < wd.size(); ++i)
    wd[i] -= lr * (ad[i] * inv_batch + 2.0 * l2 * wd[i]);
}

void step_bias(Vec& b, const Vec& acc, double inv_batch, double lr) {
  for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * acc[i] * inv_batch;
}

Vec draw_dropout_mask(Rng& rng, std::size_t n, double rate) {
  Vec mask(n);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < n; ++i)
    mask[i] = rng.unit() >= rate ? keep_scale : 0.0;
  return mask;
}

std::vector<int> map_labels(const Model& model, const LabeledDoc& doc) {
  std::vector<int> ids;
  ids.reserve(doc.labels.size());
  for (const auto& name : doc.labels) {
    auto it = std::find(model.labels.begin(), model.labels.end(), name);
    if (it == model.labels.end())
      throw std::runtime_error("label '" + name + "' unknown to the model");
    ids.push_back(static_cast<int>(it - model.labels.begin()));
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

void sgd_step(Model& model, const Gradients& acc, int batch_size, double lr,
              double l2) {
  const double inv = 1.0 / batch_size;
  decay_weights(model.conv.w, acc.w, inv, lr, l2);
  for (std::size_t i = 0; i < model.conv.v.size(); ++i)
    decay_weights(model.conv.v[i], acc.v[i], inv, lr, l2);
  step_bias(model.conv.b, acc.b, inv, lr);
  decay_weights(model.top.w, acc.top_w, inv, lr, l2);
  step_bias(model.top.b, acc.top_b, inv, lr);
}

Model train_semi(const LabeledSet& data,
                 const std::vector<TvEmbedding>& embeddings,
                 const TrainConfig& cfg) {
  cfg.validate();
  if (data.docs.empty()) throw std::invalid_argument("training data is empty");
  if (data.label_names.empty()) throw std::invalid_argument("training data has no labels");
  if (!cfg.multi_label)
    for (const auto& doc : data.docs)
      if (doc.labels.size() != 1)
        throw std::invalid_argument(
            "single-label training requires exactly one label per document");
  for (const auto& emb : embeddings)
    if (emb.spec.size != cfg.spec.size)
      throw std::invalid_argument(
          "embedding region size is incompatible with the training spec");

  std::vector<std::vector<std::string>> token_docs;
  token_docs.reserve(data.docs.size());
  for (const auto& d : data.docs) token_docs.push_back(d.tokens);

  Rng rng(cfg.seed);
  Model model;
  model.vocab = build_vocab(token_docs, cfg.vocab_max, cfg.vocab_min_count,
                            cfg.vocab_ngram);
  model.spec = cfg.spec;
  model.pooling = cfg.pooling;
  model.response_norm = cfg.response_norm;
  model.multi_label = cfg.multi_label;
  model.labels = data.label_names;
  const int m = cfg.neurons;
  model.conv.w = Matrix(m, cfg.spec.vec_dim(model.vocab));
  model.conv.w.init_uniform(rng, -0.01, 0.01);
  for (const auto& emb : embeddings) {
    Matrix v(m, emb.neurons());
    v.init_uniform(rng, -0.01, 0.01);
    model.conv.v.push_back(std::move(v));
  }
  model.conv.embeddings = embeddings;
  model.conv.b.assign(m, 0.0);
  const int classes = static_cast<int>(data.label_names.size());
  model.top.w = Matrix(classes, model.feature_dim());
  model.top.w.init_uniform(rng, -0.01, 0.01);
  model.top.b.assign(classes, 0.0);

  const std::size_t n = data.docs.size();
  std::vector<PreparedDoc> prepared(n);
  std::vector<Vec> targets(n, Vec(classes, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    prepared[i] = prepare_doc(model, encode_input(model, data.docs[i].tokens));
    if (prepared[i].num_regions() == 0)
      throw std::invalid_argument("document " + std::to_string(i) +
                                  " produces no regions under this spec");
    for (int id : map_labels(model, data.docs[i])) targets[i][id] = 1.0;
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const std::size_t feat = model.feature_dim();
  double lr = cfg.lr.initial;

  std::vector<DocGrad> slots;
  std::vector<Vec> masks;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += cfg.minibatch) {
      const std::size_t bsz = std::min<std::size_t>(cfg.minibatch, n - start);
      masks.clear();
      if (cfg.dropout > 0.0)
        for (std::size_t j = 0; j < bsz; ++j)
          masks.push_back(draw_dropout_mask(rng, feat, cfg.dropout));

      slots.assign(bsz, DocGrad{});
      parallel_for(bsz, cfg.threads, [&](std::size_t j) {
        const std::size_t d = order[start + j];
        const Vec* mask = masks.empty() ? nullptr : &masks[j];
        ForwardCache cache;
        forward_prepared(model, prepared[d], &cache, mask);
        Vec dscores(classes);
        for (int c = 0; c < classes; ++c)
          dscores[c] = 2.0 * (cache.scores[c] - targets[d][c]);
        slots[j] = backward_doc(model, cache, dscores, mask);
      });

      Gradients acc = zero_gradients(model);
      for (std::size_t j = 0; j < bsz; ++j)
        scatter_doc_grad(model, prepared[order[start + j]], slots[j], acc);
      sgd_step(model, acc, static_cast<int>(bsz), lr, cfg.l2);
    }
    if (epoch % cfg.lr.decay_interval == 0) lr *= cfg.lr.decay;
  }
  return model;
}

Model train_supervised(const LabeledSet& data, const TrainConfig& cfg) {
  return train_semi(data, {}, cfg);
}

namespace {

struct TvDocGrad {
  Vec da;                                   // conv preactivation gradient
  Vec u;                                    // conv output (for the top rows)
  std::vector<std::pair<int, double>> rows; // (target row, d loss / d p_j)
};

TvDocGrad tv_backward_example(const TvNet& net, const TvTrainExample& ex,
                              const SparseVec& alpha) {
  const int m = net.conv.neurons();
  TvDocGrad g;
  Vec preact = net.conv.b;
  addmul_sparse(preact, net.conv.w, ex.view1);
  g.u.assign(m, 0.0);
  for (int c = 0; c < m; ++c) g.u[c] = preact[c] > 0.0 ? preact[c] : 0.0;

  g.rows.reserve(alpha.pairs.size());
  Vec du(m, 0.0);
  std::size_t zi = 0;
  for (const auto& [j, w] : alpha.pairs) {
    while (zi < ex.target.pairs.size() && ex.target.pairs[zi].first < j) ++zi;
    const double zj = (zi < ex.target.pairs.size() &&
                       ex.target.pairs[zi].first == j)
                          ? ex.target.pairs[zi].second
                          : 0.0;
    const double* row = net.top_w.row(j);
    double pj = net.top_b[j];
    for (int c = 0; c < m; ++c) pj += row[c] * g.u[c];
    const double dj = 2.0 * w * (pj - zj);
    g.rows.emplace_back(j, dj);
    for (int c = 0; c < m; ++c) du[c] += dj * row[c];
  }
  g.da.assign(m, 0.0);
  for (int c = 0; c < m; ++c)
    if (preact[c] > 0.0) g.da[c] = du[c];
  return g;
}

}  // namespace

TvEmbedding train_tv(const std::vector<std::vector<std::string>>& docs,
                     const Vocabulary& view1_vocab, TargetMaker& maker,
                     const TrainConfig& cfg, const NegSampleCfg& neg,
                     TvNet* full_net) {
  cfg.validate();
  if (docs.empty()) throw std::invalid_argument("unlabeled data is empty");
  const std::vector<TvTrainExample> data =
      build_tv_dataset(docs, view1_vocab, cfg.spec, maker);
  if (data.empty())
    throw std::invalid_argument(
        "unlabeled data yields no trainable examples (all targets empty)");

  const int m = cfg.neurons;
  const int tdim = maker.dim();
  Rng rng(cfg.seed);
  TvNet net;
  net.conv.w = Matrix(m, cfg.spec.vec_dim(view1_vocab));
  net.conv.w.init_uniform(rng, -0.01, 0.01);
  net.conv.b.assign(m, 0.0);
  net.top_w = Matrix(tdim, m);
  net.top_w.init_uniform(rng, -0.01, 0.01);
  net.top_b.assign(tdim, 0.0);

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  double lr = cfg.lr.initial;

  Matrix gw(m, net.conv.w.cols()), gtopw(tdim, m);
  Vec gb(m), gtopb(tdim);
  std::vector<SparseVec> alphas;
  std::vector<TvDocGrad> slots;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += cfg.minibatch) {
      const std::size_t bsz = std::min<std::size_t>(cfg.minibatch, n - start);
      alphas.clear();
      for (std::size_t j = 0; j < bsz; ++j)
        alphas.push_back(sample_weights(data[order[start + j]].target, neg, rng));

      slots.assign(bsz, TvDocGrad{});
      parallel_for(bsz, cfg.threads, [&](std::size_t j) {
        slots[j] = tv_backward_example(net, data[order[start + j]], alphas[j]);
      });

      gw.fill(0.0);
      gtopw.fill(0.0);
      gb.assign(m, 0.0);
      gtopb.assign(tdim, 0.0);
      for (std::size_t j = 0; j < bsz; ++j) {
        const TvDocGrad& g = slots[j];
        const SparseVec& x = data[order[start + j]].view1;
        for (int c = 0; c < m; ++c) {
          const double gc = g.da[c];
          if (gc == 0.0) continue;
          gb[c] += gc;
          double* wrow = gw.row(c);
          for (const auto& [idx, v] : x.pairs) wrow[idx] += gc * v;
        }
        for (const auto& [row, dj] : g.rows) {
          gtopb[row] += dj;
          double* trow = gtopw.row(row);
          for (int c = 0; c < m; ++c) trow[c] += dj * g.u[c];
        }
      }
      const double inv = 1.0 / static_cast<double>(bsz);
      decay_weights(net.conv.w, gw, inv, lr, cfg.l2);
      decay_weights(net.top_w, gtopw, inv, lr, cfg.l2);
      step_bias(net.conv.b, gb, inv, lr);
      step_bias(net.top_b, gtopb, inv, lr);
    }
    if (epoch % cfg.lr.decay_interval == 0) lr *= cfg.lr.decay;
  }

  if (full_net) *full_net = net;
  TvEmbedding emb;
  emb.vocab = view1_vocab;
  emb.spec = cfg.spec;
  emb.spec.pad = true;  // what build_tv_dataset actually trained with
  emb.layer = std::move(net.conv);
  return emb;
}

double tv_mean_loss(const TvNet& net, const std::vector<TvTrainExample>& data,
                    const NegSampleCfg& neg, std::uint32_t alpha_seed) {
  if (data.empty()) throw std::invalid_argument("tv_mean_loss: empty dataset");
  Rng rng(alpha_seed);
  const int m = net.conv.neurons();
  double total = 0.0;
  for (const auto& ex : data) {
    const SparseVec alpha = sample_weights(ex.target, neg, rng);
    const Vec u = conv_forward(net.conv, ex.view1);
    std::size_t zi = 0;
    for (const auto& [j, w] : alpha.pairs) {
      while (zi < ex.target.pairs.size() && ex.target.pairs[zi].first < j) ++zi;
      const double zj = (zi < ex.target.pairs.size() &&
                         ex.target.pairs[zi].first == j)
                            ? ex.target.pairs[zi].second
                            : 0.0;
      const double* row = net.top_w.row(j);
      double pj = net.top_b[j];
      for (int c = 0; c < m; ++c) pj += row[c] * u[c];
      total += w * (zj - pj) * (zj - pj);
    }
  }
  return total / static_cast<double>(data.size());
}

SelectionResult model_select(const std::vector<TrainConfig>& grid,
                             const LabeledSet& data, double holdout_fraction,
                             std::uint32_t split_seed,
                             const std::vector<TvEmbedding>& embeddings) {
  if (grid.empty()) throw std::invalid_argument("model_select: empty grid");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw std::invalid_argument("holdout fraction must be in (0, 1)");
  const std::size_t n = data.docs.size();
  if (n < 2) throw std::invalid_argument("model_select: need at least 2 documents");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(split_seed);
  rng.shuffle(order);
  std::size_t n_hold = std::max<std::size_t>(
      1, static_cast<std::size_t>(holdout_fraction * static_cast<double>(n)));
  if (n_hold >= n) n_hold = n - 1;

  auto subset = [&](std::size_t from, std::size_t to) {
    std::vector<std::size_t> idx(order.begin() + from, order.begin() + to);
    std::sort(idx.begin(), idx.end());
    LabeledSet s;
    s.label_names = data.label_names;  // ids stay aligned across subsets
    for (std::size_t i : idx) s.docs.push_back(data.docs[i]);
    return s;
  };
  const LabeledSet holdout = subset(0, n_hold);
  const LabeledSet retained = subset(n_hold, n);

  for (const auto& name : data.label_names) {
    bool seen = false;
    for (const auto& doc : retained.docs)
      for (const auto& l : doc.labels) seen |= (l == name);
    if (!seen)
      throw std::runtime_error("holdout split leaves class '" + name +
                               "' without training examples");
  }

  SelectionResult result;
  double best_score = 0.0;
  Metrics best_metrics;
  bool have_best = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Model candidate = train_semi(retained, embeddings, grid[i]);
    const Metrics metrics = evaluate(candidate, holdout);
    const double score =
        grid[i].multi_label ? 1.0 - metrics.micro_f : metrics.error_rate;
    if (!have_best || score < best_score) {
      have_best = true;
      best_score = score;
      best_metrics = metrics;
      result.best_index = i;
    }
  }
  result.holdout = best_metrics;
  result.model = train_semi(data, embeddings, grid[result.best_index]);
  return result;
}

namespace {

void append_kv(std::string& out, const std::string& key, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += key + '\t' + buf + '\n';
}

}  // namespace

std::string Metrics::table() const {
  char buf[160];
  std::string out = "class                precision    recall        f1\n";
  for (const auto& c : per_class) {
    std::snprintf(buf, sizeof buf, "%-20s %9.4f %9.4f %9.4f\n",
                  c.label.c_str(), c.precision, c.recall, c.f1);
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "error_rate %.4f\nmicro_f %.4f\nmacro_f %.4f\n", error_rate,
                micro_f, macro_f);
  out += buf;
  return out;
}

std::string Metrics::tsv() const {
  std::string out;
  append_kv(out, "error_rate", error_rate);
  append_kv(out, "micro_f", micro_f);
  append_kv(out, "macro_f", macro_f);
  for (const auto& c : per_class) {
    append_kv(out, "precision." + c.label, c.precision);
    append_kv(out, "recall." + c.label, c.recall);
    append_kv(out, "f1." + c.label, c.f1);
  }
  return out;
}

Metrics evaluate(const Model& model, const LabeledSet& data) {
  if (data.docs.empty()) throw std::invalid_argument("evaluate: empty data");
  const int classes = model.num_classes();
  std::vector<long> tp(classes, 0), fp(classes, 0), fn(classes, 0);
  long wrong = 0;
  for (const auto& doc : data.docs) {
    const std::vector<int> truth = map_labels(model, doc);
    const std::vector<int> pred =
        predict(model, encode_input(model, doc.tokens));
    if (pred != truth) ++wrong;
    std::size_t ti = 0, pi = 0;
    while (ti < truth.size() || pi < pred.size()) {
      if (pi == pred.size() || (ti < truth.size() && truth[ti] < pred[pi])) {
        ++fn[truth[ti++]];
      } else if (ti == truth.size() || pred[pi] < truth[ti]) {
        ++fp[pred[pi++]];
      } else {
        ++tp[truth[ti++]];
        ++pi;
      }
    }
  }

  Metrics m;
  m.error_rate = static_cast<double>(wrong) / data.docs.size();
  long tp_all = 0, fp_all = 0, fn_all = 0;
  double f_sum = 0.0;
  for (int c = 0; c < classes; ++c) {
    ClassMetrics cm;
    cm.label = model.labels[c];
    cm.tp = tp[c];
    cm.fp = fp[c];
    cm.fn = fn[c];
    if (tp[c] + fp[c] + fn[c] == 0) {
      cm.precision = cm.recall = cm.f1 = 1.0;  // no positives, no predictions
    } else {
      cm.precision = tp[c] + fp[c] > 0
                         ? static_cast<double>(tp[c]) / (tp[c] + fp[c])
                         : 0.0;
      cm.recall = tp[c] + fn[c] > 0
                      ? static_cast<double>(tp[c]) / (tp[c] + fn[c])
                      : 0.0;
      cm.f1 = static_cast<double>(2 * tp[c]) / (2 * tp[c] + fp[c] + fn[c]);
    }
    f_sum += cm.f1;
    tp_all += tp[c];
    fp_all += fp[c];
    fn_all += fn[c];
    m.per_class.push_back(std::move(cm));
  }
  m.macro_f = classes > 0 ? f_sum / classes : 1.0;
  m.micro_f = (2 * tp_all + fp_all + fn_all) > 0
                  ? static_cast<double>(2 * tp_all) / (2 * tp_all + fp_all + fn_all)
                  : 1.0;
  return m;
}

}  // namespace retext
