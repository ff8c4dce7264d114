#ifndef ORTHO_RNG_HPP
#define ORTHO_RNG_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string_view>
#include <vector>

namespace ortho {

// Deterministic splitmix64 generator. The standard <random> distributions are
// implementation-defined, so everything that has to be reproducible byte for
// byte goes through this.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // unbiased integer in [0, bound)
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return 0;
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Box-Muller without cached spare; one wasted draw keeps state replayable.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::uint64_t state_;
};

// FNV-1a, used for derived seeds and manifest input hashes.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index = 0) {
  char buf[8];
  std::uint64_t h = fnv1a(tag, base ^ 0x9e3779b97f4a7c15ULL);
  std::memcpy(buf, &index, 8);
  return fnv1a(std::string_view(buf, 8), h);
}

} // namespace ortho

#endif
