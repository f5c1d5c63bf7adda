#pragma once

#include <string>
#include <vector>

namespace retext {

// Lowercases, splits on whitespace, and isolates punctuation runs as
// standalone tokens: "good acting, fun plot :)" ->
// [good, acting, ",", fun, plot, ":)"].
std::vector<std::string> tokenize(const std::string& text);

}  // namespace retext
