#pragma once

// Counter-based random number generation for reproducible parallel simulation.
//
// The generator is Philox4x32-10 (Salmon et al., SC'11). Every uniform drawn
// by the simulator comes from a stream keyed by (seed; pulse index, draw
// purpose), so a pulse's outcome is a pure function of the seed and the pulse
// index: identical configurations produce bit-identical event streams no
// matter how the pulse range is partitioned across blocks or threads.

#include <array>
#include <cmath>
#include <cstdint>

#include "hsps/pair_distribution.hpp"

namespace hsps {

struct Philox4x32 {
  static constexpr uint32_t MULT_A = 0xD2511F53u;
  static constexpr uint32_t MULT_B = 0xCD9E8D57u;
  static constexpr uint32_t WEYL_A = 0x9E3779B9u;
  static constexpr uint32_t WEYL_B = 0xBB67AE85u;

  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      uint64_t prod0 = uint64_t(MULT_A) * ctr[0];
      uint64_t prod1 = uint64_t(MULT_B) * ctr[2];
      ctr = {uint32_t(prod1 >> 32) ^ ctr[1] ^ key[0], uint32_t(prod1),
             uint32_t(prod0 >> 32) ^ ctr[3] ^ key[1], uint32_t(prod0)};
      key[0] += WEYL_A;
      key[1] += WEYL_B;
    }
    return ctr;
  }
};

// Draw purposes give every random decision in a pulse its own substream.
enum class Draw : uint32_t {
  pair_count = 0,
  signal_thin = 1,
  idler_thin = 2,
  noise_signal = 3,
  noise_idler = 4,
  dark_d1 = 5,
  dark_d2 = 6,
  dark_d3 = 7,
  aux = 8,
};

class KeyedStream {
 public:
  KeyedStream(uint64_t seed, uint64_t pulse, Draw purpose)
      : key_{uint32_t(seed), uint32_t(seed >> 32)},
        pulse_(pulse),
        purpose_(uint32_t(purpose)) {}

  uint64_t next_u64() {
    if (avail_ == 0) {
      auto w = Philox4x32::block(
          {uint32_t(pulse_), uint32_t(pulse_ >> 32), purpose_, counter_++}, key_);
      cache_[1] = uint64_t(w[0]) | (uint64_t(w[1]) << 32);
      cache_[0] = uint64_t(w[2]) | (uint64_t(w[3]) << 32);
      avail_ = 2;
    }
    return cache_[--avail_];
  }

  // uniform in [0, 1), 53-bit resolution
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  uint64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < 10.0) {
      // Knuth inversion by uniform products
      const double limit = std::exp(-mean);
      double prod = next_double();
      uint64_t k = 0;
      while (prod > limit) {
        prod *= next_double();
        ++k;
      }
      return k;
    }
    return poisson_ptrd(mean);
  }

  // geometric law P(n) = mu^n/(mu+1)^(n+1), sampled by cdf inversion
  uint64_t thermal(double mu) {
    if (!(mu > 0.0)) return 0;
    const double log_q = std::log(mu) - std::log1p(mu);
    double u = next_double();
    double n = std::floor(std::log1p(-u) / log_q);
    if (!(n > 0.0)) return 0;
    if (n > 9.0e15) return uint64_t(9.0e15);
    return uint64_t(n);
  }

  uint64_t from_table(const std::vector<double>& table) {
    double u = next_double();
    double acc = 0.0;
    for (size_t n = 0; n + 1 < table.size(); ++n) {
      acc += table[n];
      if (u < acc) return n;
    }
    return table.size() - 1;  // last bucket absorbs rounding residue
  }

 private:
  // Hormann's PTRD transformed-rejection sampler, exact for mean >= 10.
  uint64_t poisson_ptrd(double mean) {
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
      double u = next_double() - 0.5;
      double v = next_double();
      double us = 0.5 - std::abs(u);
      double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return uint64_t(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          k * log_mean - mean - std::lgamma(k + 1.0))
        return uint64_t(k);
    }
  }

  std::array<uint32_t, 2> key_;
  uint64_t pulse_;
  uint32_t purpose_;
  uint32_t counter_ = 0;
  std::array<uint64_t, 2> cache_{};
  int avail_ = 0;
};

// Number of pairs generated in one pulse; signal and idler each carry n photons.
inline uint64_t sample_pair_count(const PairDistribution& dist, KeyedStream& rng) {
  switch (dist.kind()) {
    case PairLaw::poissonian: return rng.poisson(dist.mu());
    case PairLaw::thermal_like: return rng.thermal(dist.mu());
    case PairLaw::explicit_table: return rng.from_table(dist.table());
  }
  return 0;
}

}  // namespace hsps
