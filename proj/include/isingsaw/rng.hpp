#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>

namespace isingsaw {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: the i-th draw is a pure function of (key, i).
///
/// Streams are keyed by hashing a list of identifiers, e.g.
/// `CounterRng::stream({master_seed, replica, chain})`, so two consumers that
/// derive the same key see the same variates regardless of scheduling. All
/// conversions to doubles and integers are done here rather than through
/// <random> distributions, whose output is library-defined.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0) : key_(splitmix64(key)) {}

  static CounterRng stream(std::initializer_list<std::uint64_t> ids) {
    std::uint64_t k = 0x6A09E667F3BCC909ULL;
    for (std::uint64_t id : ids) k = splitmix64(k ^ splitmix64(id));
    CounterRng r;
    r.key_ = k;
    return r;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    return splitmix64(key_ ^ splitmix64(counter_++ * 0xD1B54A32D192ED03ULL));
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal by Box-Muller; one value per call.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

template <class Container>
void shuffle(Container& c, CounterRng& rng) {
  using std::swap;
  for (std::size_t i = c.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    swap(c[i - 1], c[j]);
  }
}

}  // namespace isingsaw
