#pragma once

#include <cstdint>
#include <string_view>

#include "neardgd/types.hpp"

namespace neardgd {

// Deterministic generator used everywhere randomness is needed. All state is
// derived from a user seed plus a stream tag, so instances built from
// ("data"), planted solutions ("planted") and run initialisation ("init")
// draw from independent streams and results are bit-reproducible across
// platforms (no libstdc++ distribution objects involved).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent substream for (seed, tag).
  static Rng stream(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return Rng(seed ^ h);
  }

  std::uint64_t next_u64() {
    // splitmix64
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  Vector vector(Index n, double lo, double hi) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  // Row-major fill so the draw order is part of the documented contract.
  Matrix matrix(Index rows, Index cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

 private:
  std::uint64_t state_;
};

}  // namespace neardgd
