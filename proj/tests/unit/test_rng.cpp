#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "igl/rng.hpp"

using namespace igl;

namespace {

TEST(Seeds, DerivationSeparatesStreamsAndIndices) {
  std::set<std::uint64_t> seen;
  for (auto s : {Stream::simulate, Stream::pilot, Stream::sweep, Stream::fuzz, Stream::test})
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, s, i));
  EXPECT_EQ(seen.size(), 5000u);
  EXPECT_EQ(derive_seed(7, Stream::sweep, 3), derive_seed(7, Stream::sweep, 3));
  EXPECT_NE(derive_seed(7, Stream::sweep, 3), derive_seed(8, Stream::sweep, 3));
}

TEST(Seeds, SplitmixReferenceValue) {
  // First output of the reference splitmix64 generator seeded with 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Uniform, RangeAndMean) {
  Rng rng(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

class PoissonMoments : public ::testing::TestWithParam<double> {};

TEST_P(PoissonMoments, MeanAndVariance) {
  const double mu = GetParam();
  Rng rng(derive_seed(11, Stream::test, static_cast<std::uint64_t>(mu * 1000)));
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = sample_poisson(rng, mu);
    s += k;
    s2 += k * k;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, mu, 5.0 * std::sqrt(mu / n) + 1e-12);
  // Var of the sample variance is about mu + 2 mu^2 over n.
  EXPECT_NEAR(var, mu, 5.0 * std::sqrt((mu + 2.0 * mu * mu) / n) + 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Rates, PoissonMoments, ::testing::Values(0.0, 0.05, 0.5, 3.0, 9.5, 10.0, 25.0, 400.0),
                         [](const auto& info) {
                           std::ostringstream os;
                           os << info.param;
                           auto s = os.str();
                           std::replace(s.begin(), s.end(), '.', '_');
                           return "mu" + s;
                         });

TEST(Poisson, SmallRatePmf) {
  Rng rng(5);
  const double mu = 1.3;
  const int n = 400000;
  std::vector<int> counts(8, 0);
  for (int i = 0; i < n; ++i) {
    const unsigned k = sample_poisson(rng, mu);
    if (k < counts.size()) ++counts[k];
  }
  double pmf = std::exp(-mu);
  for (unsigned k = 0; k < counts.size(); ++k) {
    const double sd = std::sqrt(pmf * (1 - pmf) / n);
    EXPECT_NEAR(counts[k] / double(n), pmf, 5.0 * sd + 1e-9) << "k=" << k;
    pmf *= mu / (k + 1);
  }
}

TEST(Poisson, CappedMatchesUncappedOnInversionBranch) {
  Rng a(9), b(9);
  for (int i = 0; i < 10000; ++i) {
    const unsigned full = sample_poisson(a, 2.0);
    const unsigned capped = sample_poisson_capped(b, 2.0, 3);
    ASSERT_EQ(capped, std::min(full, 3u));
  }
}

TEST(Poisson, CapZeroAndLargeRate) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(sample_poisson_capped(rng, 5.0, 0), 0u);
    EXPECT_LE(sample_poisson_capped(rng, 50.0, 4), 4u);
  }
}

TEST(Binomial, MeanAndEdges) {
  Rng rng(4);
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += sample_binomial(rng, 3, 0.3);
  EXPECT_NEAR(s / n, 0.9, 5.0 * std::sqrt(3 * 0.3 * 0.7 / n));
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_binomial(rng, 4, 0.0), 0u);
    EXPECT_EQ(sample_binomial(rng, 4, 1.0), 4u);
  }
}

TEST(Discrete, FrequenciesAndSinglePoint) {
  Rng rng(8);
  const std::vector<double> p{0.1, 0.0, 0.6, 0.3};
  std::vector<int> c(4, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++c[sample_discrete(rng, p)];
  EXPECT_EQ(c[1], 0);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(c[k] / double(n), p[k], 5.0 * std::sqrt(p[k] * (1 - p[k]) / n) + 1e-12);

  // A single-point support must not consume a draw.
  Rng x(2), y(2);
  const std::vector<double> one{1.0};
  EXPECT_EQ(sample_discrete(x, one), 0u);
  EXPECT_EQ(x.next(), y.next());
}

}  // namespace
