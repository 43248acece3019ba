#pragma once
#include <cmath>
#include <cstdint>

namespace fpp {

// splitmix64 finalizer. Bijective on 64-bit words, used both as the stream
// generator and to fold tuple components into stream keys.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream-key derivation: absorb components one at a time. Distinct tuples of
// the same arity give independent-looking streams; tags keep purposes apart.
inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t tag) {
  return mix64(mix64(seed) ^ (tag * 0xd6e8feb86659fd93ULL));
}
inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t a) {
  return mix64(derive_key(seed, tag) ^ mix64(a + 0x165667b19e3779f9ULL));
}
inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                                std::uint64_t b) {
  return mix64(derive_key(seed, tag, a) ^ mix64(b + 0x27d4eb2f165667c5ULL));
}
inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                                std::uint64_t b, std::uint64_t c) {
  return mix64(derive_key(seed, tag, a, b) ^ mix64(c + 0x85ebca6b2b2ae3edULL));
}
inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                                std::uint64_t b, std::uint64_t c, std::uint64_t e) {
  return mix64(derive_key(seed, tag, a, b, c) ^ mix64(e + 0xc2b2ae3d27d4eb4fULL));
}

// Randomness purposes. Every consumer derives its stream from (seed, tag, ids)
// so results are independent of evaluation order and thread count.
enum RngTag : std::uint64_t {
  kTagPppCell = 1,     // (cell index) -> point count + positions
  kTagWeight = 2,      // (vertex id) -> weight uniform
  kTagPair = 3,        // (min id, max id) -> edge-presence uniform
  kTagLValue = 4,      // (min id, max id) -> L uniform
  kTagClass = 5,       // (level, cellA, cellB, layerA, layerB) skip stream
  kTagBond = 6,        // (site min, site max) -> bond uniform
  kTagRootWeight = 7,  // (root ordinal) -> conditioned-root weight uniform
  kTagExperiment = 8,  // experiment-level draws (shell directions, pair picks)
  kTagGeneric = 9,
};

// Counter PRNG over the splitmix64 sequence; cheap to seed per stream key.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Uniform on [0,1), 53-bit resolution; never returns 1.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1); safe as log() or inverse-CDF argument.
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  // Exact Poisson sampling. Knuth's product method in chunks of rate <= 16;
  // the chunk sum is Poisson(lambda) exactly by superposition.
  std::int64_t poisson(double lambda) {
    std::int64_t total = 0;
    while (lambda > 0) {
      double chunk = lambda > 16.0 ? 16.0 : lambda;
      lambda -= chunk;
      double limit = std::exp(-chunk);
      double prod = 1.0;
      std::int64_t k = -1;
      do {
        ++k;
        prod *= uniform_pos();
      } while (prod > limit);
      total += k;
    }
    return total;
  }

 private:
  std::uint64_t state_;
};

// Single uniform in [0,1) read directly from a derived key (one-shot streams,
// e.g. per-pair edge decisions).
inline double key_uniform(std::uint64_t key) {
  return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

}  // namespace fpp
