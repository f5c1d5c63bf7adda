#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retext/data.hpp"
#include "retext/loss.hpp"
#include "retext/net.hpp"
#include "retext/tv.hpp"

namespace retext {

struct LrSchedule {
  double initial = 0.05;
  double decay = 0.9;
  int decay_interval = 1;  // epochs between decays
};

struct TrainConfig {
  LrSchedule lr;
  int epochs = 20;
  int minibatch = 16;
  double l2 = 1e-4;
  double dropout = 0.5;  // on the pooled features, inverted scaling
  std::uint32_t seed = 1;
  int threads = 1;

  RegionSpec spec;
  int neurons = 100;
  PoolingCfg pooling;
  bool response_norm = true;
  bool multi_label = false;

  std::size_t vocab_max = 30000;
  std::uint64_t vocab_min_count = 1;
  int vocab_ngram = 1;

  void validate() const;
};

struct ClassMetrics {
  std::string label;
  long tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct Metrics {
  double error_rate = 0.0;
  double micro_f = 0.0;
  double macro_f = 0.0;
  std::vector<ClassMetrics> per_class;

  std::string table() const;
  std::string tsv() const;
};

// SGD update from an accumulated minibatch gradient: averages over the
// batch and adds the L2 term 2*l2*theta on weight matrices (never biases).
void sgd_step(Model& model, const Gradients& acc, int batch_size, double lr,
              double l2);

// Supervised training: SGD on squared loss against 0/1 label indicators,
// L2 on weights, optional dropout on the pooled features. Deterministic
// given the seed, whatever the thread count.
Model train_supervised(const LabeledSet& data, const TrainConfig& cfg);

// As train_supervised with the given frozen embeddings providing extra
// conv-layer input. With no embeddings this is train_supervised exactly.
Model train_semi(const LabeledSet& data,
                 const std::vector<TvEmbedding>& embeddings,
                 const TrainConfig& cfg);

// The full embedding-training network: convolution layer plus the linear
// layer onto the target space. Only the convolution layer is transferred;
// the top layer exists for training and loss measurement.
struct TvNet {
  ConvLayer conv;
  Matrix top_w;
  Vec top_b;
};

// Embedding learning: trains a TvNet with the weighted square loss under
// negative sampling and returns the convolution layer, frozen. The full
// network is copied out through full_net when diagnostics want it.
TvEmbedding train_tv(const std::vector<std::vector<std::string>>& docs,
                     const Vocabulary& view1_vocab, TargetMaker& maker,
                     const TrainConfig& cfg, const NegSampleCfg& neg,
                     TvNet* full_net = nullptr);

// Mean weighted square loss of a TvNet over a dataset, loss weights drawn
// from the given seed (use the same seed to compare two predictors on
// identical weights).
double tv_mean_loss(const TvNet& net, const std::vector<TvTrainExample>& data,
                    const NegSampleCfg& neg, std::uint32_t alpha_seed);

struct SelectionResult {
  std::size_t best_index = 0;
  Metrics holdout;  // of the winning configuration
  Model model;      // retrained on the full labeled set
};

// Deterministic seeded split, one training run per grid entry scored on
// held-out error (1 - micro F for multi-label), ties to the earliest entry;
// the winner is retrained on everything.
SelectionResult model_select(const std::vector<TrainConfig>& grid,
                             const LabeledSet& data, double holdout_fraction,
                             std::uint32_t split_seed,
                             const std::vector<TvEmbedding>& embeddings = {});

// Error rate plus per-class precision/recall/F and micro-/macro-averaged F
// over all (document, label) decisions. A class with no positives and no
// predictions scores F = 1.
Metrics evaluate(const Model& model, const LabeledSet& data);

}  // namespace retext
