#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace hrgc {

// std::mt19937_64 has a fully specified output sequence, but the standard
// distributions do not, so bounded draws are done by hand to keep results
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % n;
  }

  // Uniform in [0, 1).
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool chance(double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return unit() < p;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace hrgc
