#include "retext/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace retext {

namespace {

constexpr const char* kMagic = "RETEXT-MODEL";
constexpr int kVersion = 1;

void append_float(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_row(std::string& out, const double* row, int n) {
  for (int j = 0; j < n; ++j) {
    if (j) out.push_back(' ');
    append_float(out, row[j]);
  }
  out.push_back('\n');
}

void append_matrix(std::string& out, const Matrix& m) {
  for (int r = 0; r < m.rows(); ++r) append_row(out, m.row(r), m.cols());
}

void append_vocab(std::string& out, const Vocabulary& v) {
  out += "vocab " + std::to_string(v.size()) + ' ' +
         std::to_string(v.ngram_max()) + '\n';
  for (int i = 0; i < v.size(); ++i)
    out += std::to_string(v.count(i)) + '\t' + v.token(i) + '\n';
}

void append_spec(std::string& out, const RegionSpec& spec,
                 const PoolingCfg& pool, bool response_norm, bool multi) {
  out += "spec " + std::to_string(spec.size) + ' ' +
         std::to_string(spec.stride) + ' ' + to_string(spec.mode) + ' ' +
         std::to_string(spec.bonv_n) + ' ' + (spec.pad ? "1" : "0") + ' ' +
         to_string(pool.mode) + ' ' + std::to_string(pool.num_segments) +
         ' ' + (response_norm ? "1" : "0") + ' ' + (multi ? "1" : "0") + '\n';
}

void append_conv(std::string& out, const ConvLayer& c) {
  out += "conv " + std::to_string(c.neurons()) + ' ' +
         std::to_string(c.input_dim()) + '\n';
  append_matrix(out, c.w);
  append_row(out, c.b.data(), static_cast<int>(c.b.size()));
}

// Line-oriented reader that reports the current section and line on error.
class Reader {
 public:
  Reader(const std::string& text, std::string origin)
      : in_(text), origin_(std::move(origin)) {}

  void set_section(std::string s) { section_ = std::move(s); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error(origin_ + ": section '" + section_ + "' line " +
                             std::to_string(lineno_) + ": " + msg);
  }

  std::string next_line() {
    std::string line;
    if (!std::getline(in_, line)) fail("unexpected end of file");
    ++lineno_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  // Header of form: <name> <int> <int> ...
  std::vector<std::string> header(const std::string& expected_name,
                                  std::size_t nfields) {
    std::istringstream ls(next_line());
    std::string name;
    ls >> name;
    if (name != expected_name)
      fail("expected '" + expected_name + "' header, found '" + name + "'");
    set_section(expected_name);
    std::vector<std::string> fields;
    std::string f;
    while (ls >> f) fields.push_back(f);
    if (fields.size() != nfields)
      fail("expected " + std::to_string(nfields) + " header fields, found " +
           std::to_string(fields.size()));
    return fields;
  }

  // Peek at the next header keyword without consuming the line.
  std::string peek_keyword() {
    std::streampos pos = in_.tellg();
    std::string line;
    if (!std::getline(in_, line)) return "";
    in_.seekg(pos);
    std::istringstream ls(line);
    std::string name;
    ls >> name;
    return name;
  }

  bool at_eof() {
    return in_.peek() == std::char_traits<char>::eof();
  }

  long to_int(const std::string& s) const {
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') fail("bad integer '" + s + "'");
    return v;
  }

  void read_row(double* row, int n) {
    std::string line = next_line();
    const char* p = line.c_str();
    for (int j = 0; j < n; ++j) {
      char* end = nullptr;
      row[j] = std::strtod(p, &end);
      if (end == p)
        fail("expected " + std::to_string(n) + " values, found " +
             std::to_string(j));
      p = end;
    }
    while (*p == ' ') ++p;
    if (*p != '\0') fail("trailing data after " + std::to_string(n) + " values");
  }

  std::string residual_after_tab(const std::string& line) const {
    auto tab = line.find('\t');
    if (tab == std::string::npos) fail("expected <count>\\t<token>");
    return line.substr(tab + 1);
  }

 private:
  std::istringstream in_;
  std::string origin_;
  std::string section_ = "header";
  std::size_t lineno_ = 0;
};

Vocabulary read_vocab(Reader& r) {
  auto h = r.header("vocab", 2);
  long n = r.to_int(h[0]);
  long ngram = r.to_int(h[1]);
  if (n < 0 || ngram < 1) r.fail("bad vocab header counts");
  Vocabulary v;
  v.set_ngram_max(static_cast<int>(ngram));
  for (long i = 0; i < n; ++i) {
    std::string line = r.next_line();
    char* end = nullptr;
    unsigned long long count = std::strtoull(line.c_str(), &end, 10);
    if (end == line.c_str() || *end != '\t') r.fail("expected <count>\\t<token>");
    v.push_entry(r.residual_after_tab(line), count);
  }
  return v;
}

struct SpecFields {
  RegionSpec spec;
  PoolingCfg pooling;
  bool response_norm = false;
  bool multi = false;
};

SpecFields read_spec(Reader& r) {
  auto h = r.header("spec", 9);
  SpecFields f;
  f.spec.size = static_cast<int>(r.to_int(h[0]));
  f.spec.stride = static_cast<int>(r.to_int(h[1]));
  f.spec.mode = region_mode_from_string(h[2]);
  f.spec.bonv_n = static_cast<int>(r.to_int(h[3]));
  f.spec.pad = r.to_int(h[4]) != 0;
  f.pooling.mode = pool_mode_from_string(h[5]);
  f.pooling.num_segments = static_cast<int>(r.to_int(h[6]));
  f.response_norm = r.to_int(h[7]) != 0;
  f.multi = r.to_int(h[8]) != 0;
  return f;
}

ConvLayer read_conv(Reader& r) {
  auto h = r.header("conv", 2);
  long m = r.to_int(h[0]);
  long d = r.to_int(h[1]);
  if (m < 1 || d < 1) r.fail("bad conv dimensions");
  ConvLayer c;
  c.w = Matrix(static_cast<int>(m), static_cast<int>(d));
  for (long i = 0; i < m; ++i) r.read_row(c.w.row(static_cast<int>(i)), static_cast<int>(d));
  c.b.assign(m, 0.0);
  r.read_row(c.b.data(), static_cast<int>(m));
  return c;
}

}  // namespace

std::string serialize_model(const Model& model) {
  std::string out;
  out += std::string(kMagic) + ' ' + std::to_string(kVersion) + '\n';
  append_vocab(out, model.vocab);
  append_spec(out, model.spec, model.pooling, model.response_norm,
              model.multi_label);
  ConvLayer base{model.conv.w, model.conv.b};
  append_conv(out, base);
  for (std::size_t i = 0; i < model.conv.embeddings.size(); ++i) {
    const auto& emb = model.conv.embeddings[i];
    const auto& v = model.conv.v[i];
    out += "tv " + std::to_string(i) + ' ' + std::to_string(v.rows()) + ' ' +
           std::to_string(v.cols()) + '\n';
    append_matrix(out, v);
    append_vocab(out, emb.vocab);
    append_spec(out, emb.spec, PoolingCfg{}, false, false);
    append_conv(out, emb.layer);
  }
  out += "top " + std::to_string(model.top.w.rows()) + ' ' +
         std::to_string(model.top.w.cols()) + '\n';
  if (model.top.w.rows() > 0) {
    append_matrix(out, model.top.w);
    append_row(out, model.top.b.data(), static_cast<int>(model.top.b.size()));
  }
  out += "labels " + std::to_string(model.labels.size()) + '\n';
  for (const auto& l : model.labels) out += l + '\n';
  return out;
}

Model deserialize_model(const std::string& text, const std::string& origin) {
  Reader r(text, origin);
  {
    std::istringstream ls(r.next_line());
    std::string magic;
    long version = -1;
    ls >> magic >> version;
    if (magic != kMagic)
      r.fail("not a " + std::string(kMagic) + " file");
    if (version != kVersion)
      r.fail("unsupported model version " + std::to_string(version) +
             " (this build reads version " + std::to_string(kVersion) + ")");
  }
  Model model;
  model.vocab = read_vocab(r);
  SpecFields sf = read_spec(r);
  model.spec = sf.spec;
  model.pooling = sf.pooling;
  model.response_norm = sf.response_norm;
  model.multi_label = sf.multi;
  ConvLayer base = read_conv(r);
  model.conv.w = std::move(base.w);
  model.conv.b = std::move(base.b);

  while (r.peek_keyword() == "tv") {
    auto h = r.header("tv", 3);
    long idx = r.to_int(h[0]);
    long m = r.to_int(h[1]);
    long mu = r.to_int(h[2]);
    if (idx != static_cast<long>(model.conv.v.size()))
      r.fail("tv sections out of order");
    if (m != model.conv.neurons()) r.fail("coupling rows != neuron count");
    Matrix v(static_cast<int>(m), static_cast<int>(mu));
    for (long i = 0; i < m; ++i) r.read_row(v.row(static_cast<int>(i)), static_cast<int>(mu));
    TvEmbedding emb;
    emb.vocab = read_vocab(r);
    emb.spec = read_spec(r).spec;
    emb.layer = read_conv(r);
    if (emb.layer.neurons() != mu)
      r.fail("embedding neuron count != coupling columns");
    model.conv.v.push_back(std::move(v));
    model.conv.embeddings.push_back(std::move(emb));
  }

  {
    auto h = r.header("top", 2);
    long c = r.to_int(h[0]);
    long f = r.to_int(h[1]);
    if (c < 0 || f < 0) r.fail("bad top dimensions");
    model.top.w = Matrix(static_cast<int>(c), static_cast<int>(f));
    if (c > 0) {
      for (long i = 0; i < c; ++i)
        r.read_row(model.top.w.row(static_cast<int>(i)), static_cast<int>(f));
      model.top.b.assign(c, 0.0);
      r.read_row(model.top.b.data(), static_cast<int>(c));
    }
  }
  {
    auto h = r.header("labels", 1);
    long c = r.to_int(h[0]);
    if (c != model.top.w.rows()) r.fail("label count != top rows");
    for (long i = 0; i < c; ++i) model.labels.push_back(r.next_line());
  }
  if (!r.at_eof()) {
    r.set_section("end");
    r.fail("trailing content after labels section");
  }
  return model;
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << serialize_model(model);
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str(), path);
}

void save_tv_embedding(const TvEmbedding& emb, const std::string& path) {
  Model m;
  m.vocab = emb.vocab;
  m.spec = emb.spec;
  m.pooling = PoolingCfg{};
  m.response_norm = false;
  m.conv.w = emb.layer.w;
  m.conv.b = emb.layer.b;
  m.top.w = Matrix(0, 0);
  save_model(m, path);
}

TvEmbedding load_tv_embedding(const std::string& path) {
  Model m = load_model(path);
  if (m.top.w.rows() != 0 || !m.conv.embeddings.empty())
    throw std::runtime_error(path + ": not a tv-embedding file (expected an empty top section and no attached embeddings)");
  TvEmbedding emb;
  emb.vocab = std::move(m.vocab);
  emb.spec = m.spec;
  emb.layer.w = std::move(m.conv.w);
  emb.layer.b = std::move(m.conv.b);
  return emb;
}

}  // namespace retext
