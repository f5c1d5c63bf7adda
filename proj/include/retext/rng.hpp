#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace retext {

// Seeded RNG wrapper. std::uniform_*_distribution output is
// implementation-defined, so every draw goes through the helpers below;
// the mt19937 stream itself is fully specified by the standard, which keeps
// training runs byte-reproducible across compilers.
class Rng {
 public:
  explicit Rng(std::uint32_t seed) : gen_(seed) {}

  // Unbiased draw in [0, n), n >= 1.
  std::uint32_t index(std::uint32_t n) {
    const std::uint64_t span = 1ull << 32;
    const std::uint64_t limit = span - span % n;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return static_cast<std::uint32_t>(v % n);
  }

  // Uniform in the open interval (0, 1).
  double unit() { return (static_cast<double>(gen_()) + 0.5) * 0x1p-32; }

  // Uniform in [lo, hi].
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(static_cast<std::uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937 gen_;
};

}  // namespace retext
