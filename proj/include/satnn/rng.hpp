#pragma once

#include <cmath>
#include <cstdint>

namespace satnn {

// Deterministic PRNG (splitmix64) with explicit sampling algorithms, so that
// generated datasets and training runs are byte-identical across platforms
// and standard-library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : root_(seed), state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is ~n/2^64, irrelevant here.
  uint64_t below(uint64_t n) { return next_u64() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  // Number of Bernoulli(p) trials up to and including the first success (>= 1),
  // sampled by inversion.
  int geometric_trials(double p) {
    if (p >= 1.0) return 1;
    double u = uniform();
    return 1 + static_cast<int>(std::floor(std::log1p(-u) / std::log1p(-p)));
  }

  // Standard normal via Box-Muller (no caching, to keep the stream simple).
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Independent child stream; depends only on the construction seed.
  Rng split(uint64_t stream) const {
    uint64_t z = root_ ^ (0x9e3779b97f4a7c15ull * (stream + 0x632be59bd9b4e019ull));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return Rng(z ^ (z >> 31));
  }

 private:
  uint64_t root_;
  uint64_t state_;
};

// Derives a child seed from (seed, stream); the helper shared by every
// component that fans a root seed out over instances, epochs or steps.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed ^ (0x9e3779b97f4a7c15ull * (stream + 0x632be59bd9b4e019ull));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace satnn
