#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

namespace poselift {

// splitmix64 stream. Cheap to fork, bit-stable across platforms, and the
// only randomness source in the library so golden files stay reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1]; safe as a log() argument
  double next_unit_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Box-Muller without a cached spare: two draws per call, so the stream
  // position never depends on call history.
  double next_gaussian() {
    const double u1 = next_unit_pos();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

 private:
  std::uint64_t state_;
};

// Derives an independent child seed for (seed, path...). Used to give every
// (action, subject, clip) and every training round its own stream.
inline std::uint64_t derive_stream(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> path) {
  SplitMix64 s(seed);
  std::uint64_t out = s.next();
  for (std::uint64_t p : path) {
    SplitMix64 child(out ^ (p + 0x9E3779B97F4A7C15ULL));
    out = child.next();
  }
  return out;
}

// Fisher-Yates with a fixed visiting order.
template <typename T>
void seeded_shuffle(std::vector<T>& values, SplitMix64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace poselift
