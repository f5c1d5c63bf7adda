#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace retext {

// Id emitted for tokens outside the vocabulary. OOV positions keep their
// slot in a TokenSeq (regions still cover them) but never contribute to a
// region vector.
inline constexpr int kOovId = -1;

// Words of an n-gram entry are joined with a single space. The tokenizer
// splits on whitespace, so no single token can ever contain the separator.
inline constexpr char kNgramSep = ' ';

// Token <-> dense id map with corpus frequencies. Entries are ordered by
// descending frequency, ties broken by lexicographic token order, so builds
// are reproducible byte for byte.
class Vocabulary {
 public:
  Vocabulary() = default;

  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<std::string>& entries() const { return entries_; }
  const std::string& token(int id) const { return entries_.at(id); }
  std::uint64_t count(int id) const { return counts_.at(id); }
  int ngram_max() const { return ngram_max_; }

  // Dense id of a token, or kOovId.
  int id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kOovId : it->second;
  }

  // Appends an entry; caller is responsible for ordering. Used by the
  // builder and the model loader (which must preserve saved order exactly).
  void push_entry(std::string token, std::uint64_t count);
  void set_ngram_max(int n) { ngram_max_ = n; }

 private:
  std::vector<std::string> entries_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, int> index_;
  int ngram_max_ = 1;
};

// Document as vocabulary ids; OOV tokens become kOovId so the original
// token count is preserved.
struct TokenSeq {
  std::vector<int> ids;
  int size() const { return static_cast<int>(ids.size()); }
};

// Counts all 1..n-grams across docs, keeps those with frequency >= min_count,
// and truncates to the max_size most frequent under the deterministic
// ordering.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& docs,
                       std::size_t max_size, std::uint64_t min_count, int n);

TokenSeq encode(const std::vector<std::string>& tokens,
                const Vocabulary& vocab);

// New vocabulary with stoplist tokens removed and ids re-densified; the
// input is left untouched (vocabulary control applies to the target side
// only, callers keep the original for view-1).
Vocabulary vocab_control(const Vocabulary& vocab,
                         const std::unordered_set<std::string>& stoplist);

}  // namespace retext
