#include "retext/text.hpp"

#include <cctype>

namespace retext {

namespace {

inline bool is_space(unsigned char c) { return std::isspace(c) != 0; }
inline bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  bool cur_is_punct = false;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      flush();
      continue;
    }
    bool punct = is_punct(c);
    if (!cur.empty() && punct != cur_is_punct) flush();
    cur_is_punct = punct;
    cur.push_back(static_cast<char>(std::tolower(c)));
  }
  flush();
  return out;
}

}  // namespace retext
