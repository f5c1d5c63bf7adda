#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "retext/config.hpp"
#include "retext/data.hpp"
#include "retext/model_io.hpp"
#include "retext/net.hpp"
#include "retext/text.hpp"
#include "retext/theory.hpp"
#include "retext/train.hpp"
#include "retext/tv.hpp"

namespace {

using namespace retext;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string::npos) {
      if (pos < s.size()) out.push_back(s.substr(pos));
      break;
    }
    if (comma > pos) out.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

struct CommonTrainArgs {
  std::string config;
  std::string labeled;
  std::string out;
  double holdout = 0.2;
  std::optional<std::uint32_t> seed;
  int threads = 1;
};

std::vector<RunConfig> load_grid(const CommonTrainArgs& args) {
  std::vector<RunConfig> grid;
  for (const auto& path : split_commas(args.config)) {
    RunConfig cfg = load_config(path);
    if (args.seed) cfg.train.seed = *args.seed;
    cfg.train.threads = args.threads;
    grid.push_back(std::move(cfg));
  }
  if (grid.empty()) throw std::runtime_error("no config files given");
  return grid;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing file: " + path);
}

int run_selection(const CommonTrainArgs& args,
                  const std::vector<TvEmbedding>& embeddings) {
  const std::vector<RunConfig> grid = load_grid(args);
  const LabeledSet data = load_labeled(args.labeled);
  std::vector<TrainConfig> train_grid;
  for (const auto& cfg : grid) train_grid.push_back(cfg.train);
  const std::uint32_t split_seed = train_grid.front().seed;
  SelectionResult sel =
      model_select(train_grid, data, args.holdout, split_seed, embeddings);
  save_model(sel.model, args.out);
  std::cout << "selected config " << sel.best_index + 1 << " of "
            << train_grid.size() << "\nheld-out metrics:\n"
            << sel.holdout.table() << sel.holdout.tsv();
  return 0;
}

int cmd_train_sup(const CommonTrainArgs& args) {
  return run_selection(args, {});
}

int cmd_train_semi(const CommonTrainArgs& args, const std::string& tv_list) {
  std::vector<TvEmbedding> embeddings;
  for (const auto& path : split_commas(tv_list))
    embeddings.push_back(load_tv_embedding(path));
  return run_selection(args, embeddings);
}

int cmd_train_tv(const std::string& config_path, const std::string& unlabeled,
                 const std::string& out, const std::string& source_path,
                 const std::string& stoplist_path,
                 std::optional<std::uint32_t> seed, int threads) {
  RunConfig cfg = load_config(config_path);
  if (seed) cfg.train.seed = *seed;
  cfg.train.threads = threads;

  const auto docs = load_unlabeled(unlabeled);
  const Vocabulary view1 = build_vocab(docs, cfg.train.vocab_max,
                                       cfg.train.vocab_min_count,
                                       cfg.train.vocab_ngram);

  TargetSpec target;
  target.kind = cfg.target_kind;
  target.tau = cfg.target_tau;
  target.binarize = cfg.target_binarize;
  Model source;
  if (cfg.target_kind == TargetKind::kPartiallySupervised) {
    if (source_path.empty())
      throw std::runtime_error(
          "target.kind = partial requires --source <model>");
    source = load_model(source_path);
    target.source = &source;
  } else {
    std::unordered_set<std::string> stop;
    std::string stoplist = !stoplist_path.empty() ? stoplist_path
                                                  : cfg.target_stoplist;
    if (!stoplist.empty()) stop = load_stoplist(stoplist);
    // Targets are always plain words; vocabulary control applies to them
    // only, view-1 keeps the full vocabulary.
    const Vocabulary words =
        cfg.train.vocab_ngram == 1
            ? view1
            : build_vocab(docs, cfg.train.vocab_max, cfg.train.vocab_min_count, 1);
    target.target_vocab = vocab_control(words, stop);
    target.distinguish_sides = cfg.distinguish_sides();
  }

  auto maker = make_target_maker(target, cfg.train.spec);
  TvEmbedding emb = train_tv(docs, view1, *maker, cfg.train, cfg.neg);
  save_tv_embedding(emb, out);
  std::cout << "trained embedding: " << emb.neurons() << " neurons, view-1 dim "
            << emb.layer.input_dim() << ", target dim " << maker->dim() << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input_path,
                const std::string& out_path) {
  const Model model = load_model(model_path);
  const auto docs = load_unlabeled(input_path);
  std::string out;
  for (const auto& tokens : docs) {
    const std::vector<int> ids = predict(model, encode_input(model, tokens));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i) out.push_back(',');
      out += model.labels[ids[i]];
    }
    out.push_back('\n');
  }
  if (out_path.empty())
    std::cout << out;
  else
    write_file(out_path, out);
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& labeled_path,
             const std::string& report_path) {
  const Model model = load_model(model_path);
  const LabeledSet data = load_labeled(labeled_path);
  const Metrics m = evaluate(model, data);
  const std::string report = m.table() + m.tsv();
  std::cout << report;
  if (!report_path.empty()) write_file(report_path, report);
  return 0;
}

int cmd_verify_theory(int k, int nx1, int nx2, int ny, std::uint32_t seed,
                      double tol, int trials) {
  bool all_ok = true;
  for (int t = 0; t < trials; ++t) {
    const TwoViewModel model =
        sample_two_view_model(k, nx1, nx2, ny, seed + static_cast<std::uint32_t>(t));
    const TwoViewReport report = verify_two_view(model, tol);
    if (trials > 1) std::cout << "seed " << seed + t << "\n";
    std::cout << report.to_text();
    all_ok = all_ok && report.all_pass();
  }
  return all_ok ? 0 : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text categorization with region embeddings learned from unlabeled data"};
  app.require_subcommand(1);

  CommonTrainArgs sup;
  auto* train_sup = app.add_subcommand(
      "train-sup", "Train a supervised model on labeled data");
  train_sup->add_option("--config", sup.config,
                        "Config file(s), comma-separated grid")->required();
  train_sup->add_option("--labeled", sup.labeled, "Labeled data (label<TAB>text)")
      ->required();
  train_sup->add_option("--out", sup.out, "Output model file")->required();
  train_sup->add_option("--holdout", sup.holdout,
                        "Held-out fraction for model selection");
  train_sup->add_option("--seed", sup.seed, "Seed override");
  train_sup->add_option("--threads", sup.threads, "Worker threads");

  CommonTrainArgs semi;
  std::string semi_tv;
  auto* train_semi_cmd = app.add_subcommand(
      "train-semi", "Train with frozen tv-embeddings as extra input");
  train_semi_cmd->add_option("--config", semi.config,
                             "Config file(s), comma-separated grid")->required();
  train_semi_cmd->add_option("--labeled", semi.labeled, "Labeled data")->required();
  train_semi_cmd->add_option("--tv", semi_tv,
                             "Comma-separated tv-embedding model files")->required();
  train_semi_cmd->add_option("--out", semi.out, "Output model file")->required();
  train_semi_cmd->add_option("--holdout", semi.holdout, "Held-out fraction");
  train_semi_cmd->add_option("--seed", semi.seed, "Seed override");
  train_semi_cmd->add_option("--threads", semi.threads, "Worker threads");

  std::string tv_config, tv_unlabeled, tv_out, tv_source, tv_stoplist;
  std::optional<std::uint32_t> tv_seed;
  int tv_threads = 1;
  auto* train_tv_cmd = app.add_subcommand(
      "train-tv", "Learn a tv-embedding from unlabeled data");
  train_tv_cmd->add_option("--config", tv_config, "Config file")->required();
  train_tv_cmd->add_option("--unlabeled", tv_unlabeled,
                           "Unlabeled data, one document per line")->required();
  train_tv_cmd->add_option("--out", tv_out, "Output embedding file")->required();
  train_tv_cmd->add_option("--source", tv_source,
                           "Trained model for partially-supervised targets");
  train_tv_cmd->add_option("--stoplist", tv_stoplist,
                           "Stoplist for target vocabulary control");
  train_tv_cmd->add_option("--seed", tv_seed, "Seed override");
  train_tv_cmd->add_option("--threads", tv_threads, "Worker threads");

  std::string pr_model, pr_input, pr_out;
  auto* predict_cmd = app.add_subcommand("predict", "Predict labels for documents");
  predict_cmd->add_option("--model", pr_model, "Model file")->required();
  predict_cmd->add_option("--input", pr_input,
                          "Documents, one per line")->required();
  predict_cmd->add_option("--out", pr_out, "Output file (default stdout)");

  std::string ev_model, ev_labeled, ev_report;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on labeled data");
  eval_cmd->add_option("--model", ev_model, "Model file")->required();
  eval_cmd->add_option("--labeled", ev_labeled, "Labeled data")->required();
  eval_cmd->add_option("--report", ev_report, "Also write the report here");

  int th_k = 3, th_x1 = 8, th_x2 = 8, th_y = 2, th_trials = 1;
  std::uint32_t th_seed = 1;
  double th_tol = 1e-8;
  auto* verify_cmd = app.add_subcommand(
      "verify-theory",
      "Check the two-view recovery identities on sampled finite models");
  verify_cmd->add_option("--k", th_k, "Hidden state count");
  verify_cmd->add_option("--x1", th_x1, "|X1|");
  verify_cmd->add_option("--x2", th_x2, "|X2|");
  verify_cmd->add_option("--y", th_y, "|Y|");
  verify_cmd->add_option("--seed", th_seed, "First seed");
  verify_cmd->add_option("--tol", th_tol, "Residual tolerance");
  verify_cmd->add_option("--trials", th_trials, "Consecutive seeds to run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (train_sup->parsed()) return cmd_train_sup(sup);
    if (train_semi_cmd->parsed()) return cmd_train_semi(semi, semi_tv);
    if (train_tv_cmd->parsed())
      return cmd_train_tv(tv_config, tv_unlabeled, tv_out, tv_source,
                          tv_stoplist, tv_seed, tv_threads);
    if (predict_cmd->parsed()) return cmd_predict(pr_model, pr_input, pr_out);
    if (eval_cmd->parsed()) return cmd_eval(ev_model, ev_labeled, ev_report);
    if (verify_cmd->parsed())
      return cmd_verify_theory(th_k, th_x1, th_x2, th_y, th_seed, th_tol,
                               th_trials);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
