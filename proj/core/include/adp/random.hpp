#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace adp {

using Rng = std::mt19937_64;

// Replica r of a run seeded with `seed` draws from the stream (seed, r).
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

// Box-Muller normal sampler. Unlike std::normal_distribution its output sequence is fixed
// across standard library implementations, which keeps seeded runs reproducible.
class NormalSampler {
 public:
  template <class G>
  double operator()(G& gen) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform(gen);
    } while (u1 <= 0.0);
    const double u2 = uniform(gen);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform double in [0, 1) with 53 random bits.
  template <class G>
  static double uniform(G& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
  }

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Uniform integer in [0, n) without modulo bias.
template <class G>
std::uint64_t uniform_index(G& gen, std::uint64_t n) {
  const std::uint64_t limit = -n % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t v = gen();
    if (v >= limit) return v % n;
  }
}

}  // namespace adp
