#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gibbsym {

// SplitMix64 finalizer. Used to expand a user seed into the Mersenne Twister
// state and to derive independent stream seeds for parallel chains.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x5851f42d4c957f2dULL));
}

// mt19937_64 with a seed_seq built from SplitMix64 outputs. Doubles use the
// top 53 bits so results do not depend on the standard library's
// generate_canonical.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    std::uint32_t words[8];
    for (int i = 0; i < 4; ++i) {
      s = splitmix64(s);
      words[2 * i] = static_cast<std::uint32_t>(s);
      words[2 * i + 1] = static_cast<std::uint32_t>(s >> 32);
    }
    std::seed_seq seq(words, words + 8);
    engine_.seed(seq);
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return std::ldexp(static_cast<double>(engine_() >> 11), -53); }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer in [0, n); n > 0. Lemire's multiply-shift with rejection.
  std::uint64_t index(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(engine_);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gibbsym
