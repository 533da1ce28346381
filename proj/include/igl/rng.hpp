#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace igl {

std::uint64_t splitmix64(std::uint64_t x);

// Stream identifiers for seed derivation. Each (master, purpose, index)
// triple maps to an independent engine seed, so trials can run in any
// order or in parallel and still reproduce.
enum class Stream : std::uint64_t {
  simulate = 0x51,
  pilot = 0x9e,
  sweep = 0xa7,
  fuzz = 0xf2,
  test = 0x7e,
};

std::uint64_t derive_seed(std::uint64_t master, Stream purpose, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// Inversion for mu < 10, PTRS transformed rejection otherwise.
unsigned sample_poisson(Rng& rng, double mu);

// min(Poisson(mu), cap). Same draws as sample_poisson on the inversion
// branch; the search simply stops at cap.
unsigned sample_poisson_capped(Rng& rng, double mu, unsigned cap);

// Sum of m Bernoulli(p) draws; m is small (at most m_bar + 1).
unsigned sample_binomial(Rng& rng, unsigned m, double p);

// Index drawn from a finite distribution by inversion; one uniform unless
// the support has a single point.
std::size_t sample_discrete(Rng& rng, std::span<const double> probs);

}  // namespace igl
