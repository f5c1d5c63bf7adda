#pragma once

#include <string>
#include <unordered_set>
#include <vector>

namespace retext {

// One labeled document: raw tokens plus its label names (one for
// single-label tasks, several for multi-label).
struct LabeledDoc {
  std::vector<std::string> labels;
  std::vector<std::string> tokens;
};

struct LabeledSet {
  std::vector<LabeledDoc> docs;
  // Distinct label names, sorted lexicographically; the index is the label id.
  std::vector<std::string> label_names;

  int label_id(const std::string& name) const;
  std::vector<int> label_ids(const LabeledDoc& doc) const;
};

// `label<TAB>text`, one document per line; multi-label rows carry
// comma-separated labels. Blank lines are skipped.
LabeledSet load_labeled(const std::string& path);

// One document per line.
std::vector<std::vector<std::string>> load_unlabeled(const std::string& path);

// One token per line, '#' starts a comment line. Tokens are lowercased.
std::unordered_set<std::string> load_stoplist(const std::string& path);

}  // namespace retext
