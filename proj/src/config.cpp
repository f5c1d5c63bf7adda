#include "retext/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace retext {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Setter {
  const std::string& origin;
  std::size_t lineno;
  const std::string& key;
  const std::string& value;

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": " +
                             msg + " for key '" + key + "'");
  }

  long integer() const {
    char* end = nullptr;
    long v = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0') fail("expected an integer");
    return v;
  }
  double real() const {
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') fail("expected a number");
    return v;
  }
  bool boolean() const {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail("expected true/false");
  }
};

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = strip(t.substr(0, eq));
    const std::string value = strip(t.substr(eq + 1));
    Setter s{origin, lineno, key, value};

    if (key == "lr") cfg.train.lr.initial = s.real();
    else if (key == "lr_decay") cfg.train.lr.decay = s.real();
    else if (key == "lr_decay_interval") cfg.train.lr.decay_interval = static_cast<int>(s.integer());
    else if (key == "epochs") cfg.train.epochs = static_cast<int>(s.integer());
    else if (key == "minibatch") cfg.train.minibatch = static_cast<int>(s.integer());
    else if (key == "l2") cfg.train.l2 = s.real();
    else if (key == "dropout") cfg.train.dropout = s.real();
    else if (key == "seed") cfg.train.seed = static_cast<std::uint32_t>(s.integer());
    else if (key == "neurons") cfg.train.neurons = static_cast<int>(s.integer());
    else if (key == "region_size") cfg.train.spec.size = static_cast<int>(s.integer());
    else if (key == "stride") cfg.train.spec.stride = static_cast<int>(s.integer());
    else if (key == "region_mode") cfg.train.spec.mode = region_mode_from_string(value);
    else if (key == "bonv_n") cfg.train.spec.bonv_n = static_cast<int>(s.integer());
    else if (key == "pad") cfg.train.spec.pad = s.boolean();
    else if (key == "pooling") cfg.train.pooling.mode = pool_mode_from_string(value);
    else if (key == "num_segments") cfg.train.pooling.num_segments = static_cast<int>(s.integer());
    else if (key == "response_norm") cfg.train.response_norm = s.boolean();
    else if (key == "multi_label") cfg.train.multi_label = s.boolean();
    else if (key == "vocab_max") cfg.train.vocab_max = static_cast<std::size_t>(s.integer());
    else if (key == "vocab_min_count") cfg.train.vocab_min_count = static_cast<std::uint64_t>(s.integer());
    else if (key == "vocab_ngram") cfg.train.vocab_ngram = static_cast<int>(s.integer());
    else if (key == "neg_samples") cfg.neg.negatives_per_positive = static_cast<int>(s.integer());
    else if (key == "pos_weight") cfg.neg.positive_weight = s.real();
    else if (key == "target.kind") {
      if (value == "unsupervised") cfg.target_kind = TargetKind::kUnsupervised;
      else if (value == "partial") cfg.target_kind = TargetKind::kPartiallySupervised;
      else s.fail("expected unsupervised or partial");
    } else if (key == "target.distinguish") {
      cfg.target_distinguish = s.boolean();
      cfg.target_distinguish_set = true;
    } else if (key == "target.tau") cfg.target_tau = s.real();
    else if (key == "target.binarize") cfg.target_binarize = s.boolean();
    else if (key == "target.stoplist") cfg.target_stoplist = value;
    else
      throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace retext
