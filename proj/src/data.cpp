#include "retext/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <stdexcept>

#include "retext/text.hpp"

namespace retext {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

}  // namespace

int LabeledSet::label_id(const std::string& name) const {
  auto it = std::find(label_names.begin(), label_names.end(), name);
  if (it == label_names.end())
    throw std::runtime_error("unknown label: " + name);
  return static_cast<int>(it - label_names.begin());
}

std::vector<int> LabeledSet::label_ids(const LabeledDoc& doc) const {
  std::vector<int> ids;
  ids.reserve(doc.labels.size());
  for (const auto& l : doc.labels) ids.push_back(label_id(l));
  std::sort(ids.begin(), ids.end());
  return ids;
}

LabeledSet load_labeled(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  LabeledSet set;
  std::set<std::string> names;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected label<TAB>text");
    LabeledDoc doc;
    std::string label_field = strip(line.substr(0, tab));
    std::size_t pos = 0;
    while (pos <= label_field.size()) {
      auto comma = label_field.find(',', pos);
      std::string lab = strip(comma == std::string::npos
                                  ? label_field.substr(pos)
                                  : label_field.substr(pos, comma - pos));
      if (!lab.empty()) {
        doc.labels.push_back(lab);
        names.insert(lab);
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (doc.labels.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": empty label field");
    doc.tokens = tokenize(line.substr(tab + 1));
    set.docs.push_back(std::move(doc));
  }
  set.label_names.assign(names.begin(), names.end());
  return set;
}

std::vector<std::vector<std::string>> load_unlabeled(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<std::vector<std::string>> docs;
  std::string line;
  while (std::getline(in, line)) docs.push_back(tokenize(line));
  return docs;
}

std::unordered_set<std::string> load_stoplist(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::unordered_set<std::string> stop;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    stop.insert(t);
  }
  return stop;
}

}  // namespace retext
