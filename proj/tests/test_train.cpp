#include "doctest.h"

#include <cmath>

#include "retext/config.hpp"
#include "retext/model_io.hpp"
#include "retext/train.hpp"
#include "support/model_builders.hpp"
#include "support/test_helpers.hpp"

using namespace retext;
using test_support::adjacency_corpus;
using test_support::fixed_vocab;
using test_support::separable_toy;

TEST_SUITE_BEGIN("train");

namespace {

TrainConfig toy_config(std::uint32_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.epochs = 50;
  cfg.minibatch = 16;
  cfg.lr = {0.2, 1.0, 1};
  cfg.l2 = 1e-4;
  cfg.dropout = 0.0;
  cfg.neurons = 4;
  cfg.spec = RegionSpec{2, 1, RegionMode::kBow, 1, true};
  cfg.vocab_max = 100;
  return cfg;
}

// Deterministic classifier: neuron i fires on keyword i, class scores read
// the pooled indicators straight off.
Model keyword_model() {
  Model m;
  m.vocab = fixed_vocab({"aaa", "bbb"});
  m.spec = RegionSpec{1, 1, RegionMode::kBow, 1, true};
  m.response_norm = false;
  m.labels = {"a", "b"};
  m.conv.w = identity(2);
  m.conv.b.assign(2, 0.0);
  m.top.w = Matrix(2, 2);
  m.top.w(0, 0) = 1.0;
  m.top.w(1, 1) = 1.0;
  m.top.b.assign(2, 0.0);
  return m;
}

LabeledSet one_doc_set(const std::vector<std::string>& labels,
                       std::vector<std::pair<std::string, std::string>> rows) {
  LabeledSet s;
  s.label_names = labels;
  for (auto& [label, text] : rows) {
    LabeledDoc d;
    d.labels = {label};
    d.tokens = {text};
    s.docs.push_back(std::move(d));
  }
  return s;
}

}  // namespace

TEST_CASE("sgd_step with zero data gradient strictly shrinks weights") {
  Model m = test_support::random_model(8);
  const Gradients zero = zero_gradients(m);
  const auto norm = [](const Matrix& w) {
    double s = 0.0;
    for (double x : w.data()) s += x * x;
    return std::sqrt(s);
  };
  const double before_w = norm(m.conv.w);
  const double before_top = norm(m.top.w);
  const Vec bias_before = m.conv.b;
  sgd_step(m, zero, 1, 0.1, 0.01);
  CHECK(norm(m.conv.w) < before_w);
  CHECK(norm(m.top.w) < before_top);
  CHECK(m.conv.b == bias_before);  // no decay on biases
}

TEST_CASE("train_supervised separates a keyword toy") {
  int solved = 0;
  for (std::uint32_t seed = 1; seed <= 5; ++seed) {
    const LabeledSet data = separable_toy(20, 100 + seed);
    TrainConfig cfg = toy_config(seed);
    const Model m = train_supervised(data, cfg);
    if (evaluate(m, data).error_rate == 0.0) ++solved;
  }
  CHECK(solved >= 4);
}

TEST_CASE("training is deterministic given the seed, whatever the thread count") {
  const LabeledSet data = separable_toy(20, 55);
  TrainConfig cfg = toy_config(7);
  cfg.epochs = 8;
  cfg.dropout = 0.5;
  const std::string once = serialize_model(train_supervised(data, cfg));
  const std::string twice = serialize_model(train_supervised(data, cfg));
  CHECK(once == twice);

  TrainConfig threaded = cfg;
  threaded.threads = 4;
  CHECK(serialize_model(train_supervised(data, threaded)) == once);
}

TEST_CASE("huge l2 with a tiny rate drives weights to zero") {
  const LabeledSet data = separable_toy(20, 9);
  TrainConfig cfg = toy_config(3);
  cfg.l2 = 1e6;
  cfg.lr = {1e-7, 1.0, 1};
  const Model m = train_supervised(data, cfg);
  double max_w = 0.0;
  for (double x : m.conv.w.data()) max_w = std::max(max_w, std::abs(x));
  for (double x : m.top.w.data()) max_w = std::max(max_w, std::abs(x));
  CHECK(max_w < 1e-6);
  CHECK(evaluate(m, data).error_rate >= 0.4);  // chance - 10%
}

TEST_CASE("empty training data is an error") {
  LabeledSet empty;
  empty.label_names = {"a"};
  CHECK_THROWS_AS(train_supervised(empty, toy_config(1)), std::invalid_argument);
}

TEST_CASE("train_tv beats the zero predictor on an adjacency corpus") {
  const auto docs = adjacency_corpus(300, 812);
  const Vocabulary vocab = build_vocab(docs, 100, 1, 1);

  TrainConfig cfg = toy_config(4);
  cfg.spec = RegionSpec{1, 1, RegionMode::kBow, 1, true};
  cfg.neurons = 6;
  cfg.epochs = 10;
  cfg.lr = {0.2, 0.9, 1};
  const NegSampleCfg neg{3, 1.0};

  TargetSpec target;
  target.kind = TargetKind::kUnsupervised;
  target.target_vocab = vocab;
  auto maker = make_target_maker(target, cfg.spec);
  const auto dataset = build_tv_dataset(docs, vocab, cfg.spec, *maker);
  REQUIRE(!dataset.empty());

  TvNet trained;
  train_tv(docs, vocab, *maker, cfg, neg, &trained);

  TvNet zero_net;
  zero_net.conv.w = Matrix(cfg.neurons, trained.conv.input_dim());
  zero_net.conv.b.assign(cfg.neurons, 0.0);
  zero_net.top_w = Matrix(maker->dim(), cfg.neurons);
  zero_net.top_b.assign(maker->dim(), 0.0);

  // identical weight draws for both predictors
  const double trained_loss = tv_mean_loss(trained, dataset, neg, 999);
  const double zero_loss = tv_mean_loss(zero_net, dataset, neg, 999);
  CHECK(zero_loss > 0.0);
  CHECK(trained_loss < 0.5 * zero_loss);
}

TEST_CASE("train_tv determinism and zero-epoch identity") {
  const auto docs = adjacency_corpus(50, 13);
  const Vocabulary vocab = build_vocab(docs, 100, 1, 1);
  TrainConfig cfg = toy_config(6);
  cfg.spec = RegionSpec{1, 1, RegionMode::kBow, 1, true};
  cfg.neurons = 3;
  cfg.epochs = 2;
  NegSampleCfg neg{2, 1.0};
  TargetSpec target;
  target.kind = TargetKind::kUnsupervised;
  target.target_vocab = vocab;

  SUBCASE("same seed, same embedding") {
    auto m1 = make_target_maker(target, cfg.spec);
    auto m2 = make_target_maker(target, cfg.spec);
    const TvEmbedding a = train_tv(docs, vocab, *m1, cfg, neg);
    const TvEmbedding b = train_tv(docs, vocab, *m2, cfg, neg);
    CHECK(a.layer == b.layer);
  }
  SUBCASE("zero epochs returns the seeded initialization") {
    cfg.epochs = 0;
    auto maker = make_target_maker(target, cfg.spec);
    const TvEmbedding emb = train_tv(docs, vocab, *maker, cfg, neg);
    Rng rng(cfg.seed);
    Matrix expect(cfg.neurons, cfg.spec.vec_dim(vocab));
    expect.init_uniform(rng, -0.01, 0.01);
    CHECK(emb.layer.w == expect);
    CHECK(emb.layer.b == Vec(cfg.neurons, 0.0));
  }
}

TEST_CASE("train_semi with no embeddings is train_supervised, bit for bit") {
  const LabeledSet data = separable_toy(16, 31);
  TrainConfig cfg = toy_config(12);
  cfg.epochs = 6;
  cfg.dropout = 0.5;
  CHECK(serialize_model(train_semi(data, {}, cfg)) ==
        serialize_model(train_supervised(data, cfg)));
}

TEST_CASE("train_semi leaves attached embeddings frozen") {
  const LabeledSet data = separable_toy(16, 44);
  TrainConfig cfg = toy_config(5);
  cfg.epochs = 4;
  cfg.spec = RegionSpec{2, 1, RegionMode::kBow, 1, true};

  // embedding over the same corpus vocabulary
  const Vocabulary vocab = build_vocab(
      [&] {
        std::vector<std::vector<std::string>> t;
        for (const auto& d : data.docs) t.push_back(d.tokens);
        return t;
      }(),
      100, 1, 1);
  TvEmbedding emb;
  emb.vocab = vocab;
  emb.spec = cfg.spec;
  Rng rng(2024);
  emb.layer.w = Matrix(3, emb.spec.vec_dim(vocab));
  emb.layer.w.init_uniform(rng, -0.3, 0.3);
  emb.layer.b.assign(3, 0.1);
  const Matrix frozen_w = emb.layer.w;
  const Vec frozen_b = emb.layer.b;

  const Model m = train_semi(data, {emb}, cfg);
  CHECK(m.conv.embeddings.size() == 1);
  CHECK(m.conv.embeddings[0].layer.w == frozen_w);
  CHECK(m.conv.embeddings[0].layer.b == frozen_b);
  // and the coupling matrix actually trained away from its tiny init
  double max_v = 0.0;
  for (double x : m.conv.v[0].data()) max_v = std::max(max_v, std::abs(x));
  CHECK(max_v > 0.0);
}

TEST_CASE("model_select picks by held-out error and retrains on everything") {
  const LabeledSet data = separable_toy(30, 71);

  SUBCASE("grid of one trains that config on the full data") {
    TrainConfig cfg = toy_config(2);
    cfg.epochs = 5;
    const SelectionResult sel = model_select({cfg}, data, 0.25, cfg.seed);
    CHECK(sel.best_index == 0);
    CHECK(serialize_model(sel.model) ==
          serialize_model(train_supervised(data, cfg)));
  }
  SUBCASE("a diverging rate loses to a sane one") {
    int good = 0;
    for (std::uint32_t seed = 1; seed <= 5; ++seed) {
      TrainConfig bad = toy_config(seed);
      bad.epochs = 40;
      bad.lr = {1e3, 1.0, 1};
      TrainConfig sane = toy_config(seed);
      sane.epochs = 40;
      const SelectionResult sel =
          model_select({bad, sane}, separable_toy(30, 500 + seed), 0.25, seed);
      if (sel.best_index == 1) ++good;
    }
    CHECK(good >= 4);
  }
  SUBCASE("selection is deterministic") {
    TrainConfig a = toy_config(3);
    a.epochs = 4;
    TrainConfig b = toy_config(3);
    b.epochs = 4;
    b.lr = {0.05, 0.9, 1};
    const SelectionResult s1 = model_select({a, b}, data, 0.2, 17);
    const SelectionResult s2 = model_select({a, b}, data, 0.2, 17);
    CHECK(s1.best_index == s2.best_index);
    CHECK(serialize_model(s1.model) == serialize_model(s2.model));
  }
  SUBCASE("empty grid is an error") {
    CHECK_THROWS_AS(model_select({}, data, 0.2, 1), std::invalid_argument);
  }
}

TEST_CASE("evaluate computes error, micro-F and macro-F") {
  const Model m = keyword_model();

  SUBCASE("all correct") {
    const LabeledSet data =
        one_doc_set({"a", "b"}, {{"a", "aaa"}, {"b", "bbb"}, {"a", "aaa"}});
    const Metrics metrics = evaluate(m, data);
    CHECK(metrics.error_rate == 0.0);
    CHECK(metrics.micro_f == 1.0);
    CHECK(metrics.macro_f == 1.0);
  }
  SUBCASE("all wrong") {
    const LabeledSet data =
        one_doc_set({"a", "b"}, {{"b", "aaa"}, {"a", "bbb"}});
    CHECK(evaluate(m, data).error_rate == 1.0);
  }
  SUBCASE("hand-computed mixed case") {
    // predictions: doc1 -> a (TP for a), doc2 -> a (FP for a, FN for b)
    const LabeledSet data = one_doc_set({"a", "b"}, {{"a", "aaa"}, {"b", "aaa"}});
    const Metrics metrics = evaluate(m, data);
    CHECK(metrics.error_rate == 0.5);
    // micro: TP=1, FP=1, FN=1 -> 2*1 / (2*1 + 1 + 1) = 0.5
    CHECK(metrics.micro_f == doctest::Approx(0.5).epsilon(1e-15));
    // class a: F = 2/3; class b: F = 0; macro = 1/3
    CHECK(metrics.macro_f == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(metrics.per_class[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(metrics.per_class[1].f1 == 0.0);
  }
  SUBCASE("the report carries both formats") {
    const LabeledSet data = one_doc_set({"a", "b"}, {{"a", "aaa"}, {"b", "bbb"}});
    const Metrics metrics = evaluate(m, data);
    CHECK(metrics.table().find("error_rate") != std::string::npos);
    CHECK(metrics.tsv().find("micro_f\t1\n") != std::string::npos);
  }
}

TEST_CASE("multi-label evaluation pools decisions across labels") {
  // three keyword neurons, three labels; "ccc" never occurs in the data
  Model m;
  m.vocab = fixed_vocab({"aaa", "bbb", "ccc"});
  m.spec = RegionSpec{1, 1, RegionMode::kBow, 1, true};
  m.response_norm = false;
  m.multi_label = true;
  m.labels = {"a", "b", "c"};
  m.conv.w = identity(3);
  m.conv.b.assign(3, 0.0);
  m.top.w = identity(3);
  m.top.b.assign(3, 0.0);

  LabeledSet data;
  data.label_names = {"a", "b", "c"};
  auto add = [&](std::vector<std::string> labels, std::vector<std::string> toks) {
    LabeledDoc d;
    d.labels = std::move(labels);
    d.tokens = std::move(toks);
    data.docs.push_back(std::move(d));
  };
  add({"a", "b"}, {"aaa", "bbb"});  // predicted {a,b}: both TP
  add({"a"}, {"aaa", "bbb"});       // predicted {a,b}: TP a, FP b
  add({"b"}, {"xxx"});              // predicted {}: FN b

  const Metrics metrics = evaluate(m, data);
  CHECK(metrics.error_rate == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  // pooled: TP=3, FP=1, FN=1 -> micro F = 6/8
  CHECK(metrics.micro_f == doctest::Approx(0.75).epsilon(1e-15));
  // class a: F=1; class b: 2*1/(2+1+1)=0.5; class c: no truth, no
  // predictions -> F defined as 1; macro = (1 + 0.5 + 1)/3
  CHECK(metrics.per_class[2].f1 == 1.0);
  CHECK(metrics.macro_f == doctest::Approx(2.5 / 3.0).epsilon(1e-15));
}

TEST_CASE("multi-label training fits per-label indicators") {
  LabeledSet data;
  data.label_names = {"color", "shape"};
  Rng rng(31);
  const std::vector<std::string> color_words = {"red", "blue", "green"};
  const std::vector<std::string> shape_words = {"cube", "ball", "cone"};
  const std::vector<std::string> filler = {"the", "a", "some"};
  for (int i = 0; i < 24; ++i) {
    LabeledDoc d;
    const bool has_color = i % 2 == 0, has_shape = i % 4 < 2;
    if (has_color) d.labels.push_back("color");
    if (has_shape) d.labels.push_back("shape");
    if (d.labels.empty()) d.labels.push_back("color");  // keep rows labeled
    for (int w = 0; w < 6; ++w) {
      const auto& pool = (w % 2 == 0 && has_color) ? color_words
                         : (w % 2 == 1 && has_shape) ? shape_words
                                                     : filler;
      d.tokens.push_back(pool[rng.index(pool.size())]);
    }
    data.docs.push_back(std::move(d));
  }
  TrainConfig cfg = toy_config(3);
  cfg.multi_label = true;
  cfg.epochs = 80;
  const Model m = train_supervised(data, cfg);
  const Metrics metrics = evaluate(m, data);
  CHECK(metrics.micro_f > 0.9);

  // single-label mode rejects multi-label rows
  TrainConfig strict = toy_config(3);
  strict.multi_label = false;
  CHECK_THROWS_AS(train_supervised(data, strict), std::invalid_argument);
}

TEST_CASE("model_select refuses splits that strip a class") {
  LabeledSet data;
  data.label_names = {"a", "b"};
  for (int i = 0; i < 2; ++i) {
    LabeledDoc d;
    d.labels = {i == 0 ? "a" : "b"};
    d.tokens = {"tok", "tok"};
    data.docs.push_back(std::move(d));
  }
  // 2 docs, holdout 1: the retained half always misses a class
  CHECK_THROWS_AS(model_select({toy_config(1)}, data, 0.5, 1),
                  std::runtime_error);
}

TEST_CASE("bag-of-n-gram training runs end to end") {
  const LabeledSet data = separable_toy(20, 202);
  TrainConfig cfg = toy_config(8);
  cfg.spec = RegionSpec{3, 1, RegionMode::kBonv, 2, true};
  cfg.vocab_ngram = 2;
  const Model m = train_supervised(data, cfg);
  CHECK(m.vocab.ngram_max() == 2);
  // the vocabulary really contains bigrams
  bool has_bigram = false;
  for (int i = 0; i < m.vocab.size(); ++i)
    has_bigram |= m.vocab.token(i).find(' ') != std::string::npos;
  CHECK(has_bigram);
  CHECK(evaluate(m, data).error_rate <= 0.1);
  CHECK(serialize_model(train_supervised(data, cfg)) == serialize_model(m));
}

TEST_CASE("tv training is thread-count invariant") {
  const auto docs = adjacency_corpus(40, 61);
  const Vocabulary vocab = build_vocab(docs, 100, 1, 1);
  TrainConfig cfg = toy_config(9);
  cfg.spec = RegionSpec{1, 1, RegionMode::kBow, 1, true};
  cfg.neurons = 3;
  cfg.epochs = 2;
  TargetSpec target;
  target.kind = TargetKind::kUnsupervised;
  target.target_vocab = vocab;
  auto m1 = make_target_maker(target, cfg.spec);
  const TvEmbedding single = train_tv(docs, vocab, *m1, cfg, NegSampleCfg{2, 1.0});
  cfg.threads = 3;
  auto m2 = make_target_maker(target, cfg.spec);
  const TvEmbedding threaded = train_tv(docs, vocab, *m2, cfg, NegSampleCfg{2, 1.0});
  CHECK(single.layer == threaded.layer);
}

TEST_CASE("three embeddings of different kinds attach at once") {
  const auto task = test_support::make_concept_task(7001, 60, 2000, 300, 150, 40);
  TrainConfig sup;
  sup.seed = 1;
  sup.epochs = 40;
  sup.minibatch = 16;
  sup.lr = {0.2, 1.0, 1};
  sup.l2 = 1e-4;
  sup.dropout = 0.0;
  sup.neurons = 10;
  sup.spec = RegionSpec{4, 1, RegionMode::kBow, 1, true};
  sup.vocab_max = 30000;
  const Model m_sup = train_supervised(task.train, sup);
  const double e_sup = evaluate(m_sup, task.test).error_rate;

  TrainConfig tvc = sup;
  tvc.epochs = 3;
  tvc.neurons = 8;
  const Vocabulary uvocab = build_vocab(task.unlabeled, 30000, 1, 1);
  TargetSpec unsup;
  unsup.kind = TargetKind::kUnsupervised;
  unsup.target_vocab = uvocab;
  auto mk1 = make_target_maker(unsup, tvc.spec);
  const TvEmbedding e1 =
      train_tv(task.unlabeled, uvocab, *mk1, tvc, NegSampleCfg{5, 1.0});

  TargetSpec partial;
  partial.kind = TargetKind::kPartiallySupervised;
  partial.source = &m_sup;
  auto mk2 = make_target_maker(partial, tvc.spec);
  const TvEmbedding e2 =
      train_tv(task.unlabeled, uvocab, *mk2, tvc, NegSampleCfg{5, 1.0});

  TrainConfig tvb = tvc;
  tvb.spec = RegionSpec{4, 1, RegionMode::kBonv, 2, true};
  const Vocabulary nvocab = build_vocab(task.unlabeled, 30000, 1, 2);
  auto mk3 = make_target_maker(unsup, tvb.spec);
  const TvEmbedding e3 =
      train_tv(task.unlabeled, nvocab, *mk3, tvb, NegSampleCfg{5, 1.0});

  const Model m3 = train_semi(task.train, {e1, e2, e3}, sup);
  CHECK(m3.conv.v.size() == 3);
  CHECK(m3.conv.embeddings[2].vocab.size() == nvocab.size());
  const double e_semi = evaluate(m3, task.test).error_rate;
  CHECK(e_semi <= e_sup);
}

TEST_CASE("model_select carries attached embeddings through") {
  const LabeledSet data = separable_toy(24, 63);
  std::vector<std::vector<std::string>> tokens;
  for (const auto& d : data.docs) tokens.push_back(d.tokens);
  const Vocabulary vocab = build_vocab(tokens, 100, 1, 1);

  TvEmbedding emb;
  emb.vocab = vocab;
  emb.spec = RegionSpec{2, 1, RegionMode::kBow, 1, true};
  Rng rng(5);
  emb.layer.w = Matrix(3, emb.spec.vec_dim(vocab));
  emb.layer.w.init_uniform(rng, -0.2, 0.2);
  emb.layer.b.assign(3, 0.0);

  TrainConfig a = toy_config(4);
  a.epochs = 15;
  TrainConfig b = a;
  b.neurons = 6;
  const SelectionResult sel = model_select({a, b}, data, 0.25, 9, {emb});
  CHECK(sel.model.conv.embeddings.size() == 1);
  CHECK(sel.model.conv.embeddings[0].layer.w == emb.layer.w);
  CHECK(evaluate(sel.model, data).error_rate == 0.0);
}

TEST_CASE("evaluation is dropout-free and repeatable") {
  const LabeledSet data = separable_toy(10, 3);
  TrainConfig cfg = toy_config(2);
  cfg.epochs = 3;
  cfg.dropout = 0.6;
  const Model m = train_supervised(data, cfg);
  const ModelInput in = encode_input(m, data.docs[0].tokens);
  const std::vector<int> first = predict(m, in);
  for (int i = 0; i < 5; ++i) CHECK(predict(m, in) == first);
}

TEST_CASE("config files parse into training settings") {
  const std::string text =
      "# comment\n"
      "lr = 0.25\n"
      "epochs = 7\n"
      "region_mode = seq\n"
      "region_size = 3\n"
      "pooling = average\n"
      "neg_samples = 9\n"
      "target.kind = partial\n"
      "target.tau = 0.5\n";
  const RunConfig cfg = parse_config_text(text, "test");
  CHECK(cfg.train.lr.initial == 0.25);
  CHECK(cfg.train.epochs == 7);
  CHECK(cfg.train.spec.mode == RegionMode::kSeq);
  CHECK(cfg.train.spec.size == 3);
  CHECK(cfg.train.pooling.mode == PoolMode::kAverage);
  CHECK(cfg.neg.negatives_per_positive == 9);
  CHECK(cfg.target_kind == TargetKind::kPartiallySupervised);
  CHECK(cfg.target_tau == 0.5);
  // distinguish defaults to the view-1 style
  CHECK(cfg.distinguish_sides() == true);

  CHECK_THROWS_WITH_AS(parse_config_text("nope = 3\n", "t"),
                       doctest::Contains("unknown key 'nope'"),
                       std::runtime_error);
  CHECK_THROWS_AS(parse_config_text("lr 0.5\n", "t"), std::runtime_error);
}

TEST_SUITE_END();
