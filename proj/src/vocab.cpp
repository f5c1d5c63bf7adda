#include "retext/vocab.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace retext {

void Vocabulary::push_entry(std::string token, std::uint64_t count) {
  index_.emplace(token, static_cast<int>(entries_.size()));
  entries_.push_back(std::move(token));
  counts_.push_back(count);
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& docs,
                       std::size_t max_size, std::uint64_t min_count, int n) {
  if (max_size < 1 || min_count < 1 || n < 1)
    throw std::invalid_argument("build_vocab: max_size, min_count and n must be >= 1");

  std::unordered_map<std::string, std::uint64_t> freq;
  std::string key;
  for (const auto& doc : docs) {
    for (std::size_t start = 0; start < doc.size(); ++start) {
      key.clear();
      for (int len = 1; len <= n && start + len <= doc.size(); ++len) {
        if (len > 1) key.push_back(kNgramSep);
        key += doc[start + len - 1];
        ++freq[key];
      }
    }
  }

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  kept.reserve(freq.size());
  for (auto& [tok, c] : freq)
    if (c >= min_count) kept.emplace_back(tok, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (kept.size() > max_size) kept.resize(max_size);

  Vocabulary v;
  v.set_ngram_max(n);
  for (auto& [tok, c] : kept) v.push_entry(std::move(tok), c);
  return v;
}

TokenSeq encode(const std::vector<std::string>& tokens,
                const Vocabulary& vocab) {
  TokenSeq seq;
  seq.ids.reserve(tokens.size());
  for (const auto& t : tokens) seq.ids.push_back(vocab.id(t));
  return seq;
}

Vocabulary vocab_control(const Vocabulary& vocab,
                         const std::unordered_set<std::string>& stoplist) {
  Vocabulary out;
  out.set_ngram_max(vocab.ngram_max());
  for (int i = 0; i < vocab.size(); ++i) {
    if (stoplist.count(vocab.token(i))) continue;
    out.push_entry(vocab.token(i), vocab.count(i));
  }
  return out;
}

}  // namespace retext
