#include "igl/rng.hpp"

#include <cmath>
#include <limits>

namespace igl {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, Stream purpose, std::uint64_t index) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  return splitmix64(h + index);
}

namespace {

constexpr unsigned kInversionLimit = 1u << 20;

unsigned poisson_inversion(Rng& rng, double mu, unsigned cap) {
  const double u = rng.uniform();
  double p = std::exp(-mu);
  double cdf = p;
  unsigned k = 0;
  while (u > cdf && k < cap) {
    ++k;
    p *= mu / k;
    cdf += p;
    if (p == 0.0 && k > mu) break;  // cdf rounding stalled below u
  }
  return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables".
unsigned poisson_ptrs(Rng& rng, double mu) {
  const double slam = std::sqrt(mu);
  const double loglam = std::log(mu);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mu + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<unsigned>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mu + k * loglam - std::lgamma(k + 1.0))
      return static_cast<unsigned>(k);
  }
}

}  // namespace

unsigned sample_poisson(Rng& rng, double mu) {
  if (!(mu > 0.0)) return 0;
  if (mu < 10.0) return poisson_inversion(rng, mu, kInversionLimit);
  return poisson_ptrs(rng, mu);
}

unsigned sample_poisson_capped(Rng& rng, double mu, unsigned cap) {
  if (!(mu > 0.0) || cap == 0) return 0;
  if (mu < 10.0) return poisson_inversion(rng, mu, cap);
  const unsigned k = poisson_ptrs(rng, mu);
  return k < cap ? k : cap;
}

unsigned sample_binomial(Rng& rng, unsigned m, double p) {
  unsigned n = 0;
  for (unsigned i = 0; i < m; ++i) n += rng.uniform() < p ? 1u : 0u;
  return n;
}

std::size_t sample_discrete(Rng& rng, std::span<const double> probs) {
  if (probs.size() <= 1) return 0;
  const double u = rng.uniform();
  double cdf = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    cdf += probs[i];
    if (u < cdf) return i;
  }
  return probs.size() - 1;
}

}  // namespace igl
