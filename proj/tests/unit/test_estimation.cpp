#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "igl/error.hpp"
#include "igl/estimation.hpp"
#include "igl/kernels.hpp"

using namespace igl;

namespace {

Trajectory from_bits(const std::vector<std::vector<int>>& rows) {
  Trajectory t(static_cast<int>(rows.size()), 1, 0, rows[0].size());
  for (std::size_t v = 0; v < rows.size(); ++v)
    for (std::size_t i = 0; i < rows[v].size(); ++i) t.set(i, static_cast<int>(v), rows[v][i], 1);
  return t;
}

Trajectory random_trajectory(int nodes, int d, unsigned m_bar, std::size_t length, std::uint64_t seed) {
  Trajectory t(nodes, d, m_bar, length);
  Rng rng(seed);
  for (std::size_t i = 0; i < length; ++i)
    for (int v = 0; v < nodes; ++v) {
      const unsigned m = 1 + static_cast<unsigned>(rng.next() % (m_bar + 1));
      t.set(i, v, static_cast<unsigned>(rng.next() % (m + 1)), m);
    }
  return t;
}

TEST(Windows, HandEnumeratedExample) {
  const auto traj = from_bits({{0, 1, 1, 0, 1}, {1, 1, 0, 0, 1}});
  const SymbolTrajectory sym(traj);
  const std::vector<int> q{1};
  const auto w = build_windows(sym, 0, q);
  EXPECT_EQ(w.joint.total, 4u);
  EXPECT_EQ(w.marginal.total, 4u);
  ASSERT_EQ(w.joint.counts.size(), 4u);
  for (auto [next, self, other] : {std::array{1, 0, 1}, {1, 1, 1}, {0, 1, 0}, {1, 0, 0}}) {
    HistoryKey k{static_cast<std::uint16_t>(next),
                 {static_cast<std::uint16_t>(self), static_cast<std::uint16_t>(other)}};
    EXPECT_EQ(w.joint.counts.at(k), 1u);
  }
  EXPECT_NEAR(entropy(w.joint), std::log(4.0), 1e-15);
  EXPECT_NEAR(entropy(w.marginal), std::log(4.0), 1e-15);
  EXPECT_NEAR(directed_conditional_entropy(w), 0.0, 1e-15);
  EXPECT_NEAR(EmpiricalEntropySource(traj).conditional_entropy(0, q), 0.0, 1e-15);
}

TEST(Windows, MarginalIsJointWithNextDropped) {
  const auto traj = random_trajectory(3, 2, 2, 300, 5);
  const SymbolTrajectory sym(traj);
  const std::vector<int> q{0, 2};
  const auto w = build_windows(sym, 1, q);
  std::map<std::vector<std::uint16_t>, std::uint64_t> folded;
  for (const auto& [k, c] : w.joint.counts) folded[k.history] += c;
  ASSERT_EQ(folded.size(), w.marginal.counts.size());
  for (const auto& [k, c] : w.marginal.counts) EXPECT_EQ(folded.at(k.history), c);
  EXPECT_EQ(w.joint.total, 298u);
}

TEST(Windows, BoundaryAndErrors) {
  const auto traj = random_trajectory(2, 3, 0, 4, 1);
  const SymbolTrajectory sym(traj);
  EXPECT_EQ(build_windows(sym, 0, {}).joint.total, 1u);
  const auto short_traj = random_trajectory(2, 3, 0, 3, 1);
  const SymbolTrajectory short_sym(short_traj);
  try {
    build_windows(short_sym, 0, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooShort);
  }
  const std::vector<int> self{0};
  EXPECT_THROW(build_windows(sym, 0, self), Error);
  const std::vector<int> bad{5};
  EXPECT_THROW(build_windows(sym, 0, bad), Error);
}

TEST(Entropy, KnownDistributions) {
  EmpiricalDistribution point;
  point.counts[{std::nullopt, {0}}] = 10;
  point.total = 10;
  EXPECT_DOUBLE_EQ(entropy(point), 0.0);

  EmpiricalDistribution uniform;
  for (std::uint16_t s = 0; s < 5; ++s) uniform.counts[{std::nullopt, {s}}] = 3;
  uniform.total = 15;
  EXPECT_NEAR(entropy(uniform), std::log(5.0), 1e-15);
  EXPECT_NEAR(uniform.probability({std::nullopt, {2}}), 0.2, 1e-15);
  EXPECT_EQ(uniform.probability({std::nullopt, {7}}), 0.0);
}

struct FastCase {
  int nodes, d;
  unsigned m_bar;
  std::size_t length;
};

class FastMatchesReference : public ::testing::TestWithParam<std::tuple<FastCase, kernels::Isa>> {};

TEST_P(FastMatchesReference, AllConditioningSets) {
  const auto [c, isa] = GetParam();
  if (!kernels::isa_available(isa)) GTEST_SKIP();
  kernels::set_isa_override(isa);
  const auto traj = random_trajectory(c.nodes, c.d, c.m_bar, c.length, c.nodes * 100 + c.d * 10 + c.m_bar);
  const EmpiricalEntropySource fast(traj);
  const SymbolTrajectory& sym = fast.symbols();
  for (int v = 0; v < c.nodes; ++v)
    for (unsigned mask = 0; mask < (1u << c.nodes); ++mask) {
      if (mask & (1u << v)) continue;
      std::vector<int> q;
      for (int u = 0; u < c.nodes; ++u)
        if (mask & (1u << u)) q.push_back(u);
      const double ref = directed_conditional_entropy(build_windows(sym, v, q));
      EXPECT_NEAR(fast.conditional_entropy(v, q), ref, 1e-12) << "v=" << v << " mask=" << mask;
    }
  kernels::set_isa_override(std::nullopt);
}

// Cases cover the dense histogram, the radix-sort path (code space above the
// dense limit) and code compression (code space beyond 64 bits).
INSTANTIATE_TEST_SUITE_P(
    Paths, FastMatchesReference,
    ::testing::Combine(::testing::Values(FastCase{3, 1, 0, 1000}, FastCase{2, 2, 2, 700},
                                         FastCase{3, 2, 2, 2000}, FastCase{4, 2, 3, 3000},
                                         FastCase{4, 3, 20, 1500}, FastCase{4, 4, 40, 800}),
                       ::testing::Values(kernels::Isa::scalar, kernels::Isa::avx2)),
    [](const auto& info) {
      const auto& c = std::get<0>(info.param);
      const auto isa = std::get<1>(info.param);
      return "v" + std::to_string(c.nodes) + "_d" + std::to_string(c.d) + "_m" + std::to_string(c.m_bar) + "_T" +
             std::to_string(c.length) + (isa == kernels::Isa::avx2 ? "_avx2" : "_scalar");
    });

TEST(Estimator, RangeAndMonotonicity) {
  const auto traj = random_trajectory(4, 2, 2, 5000, 9);
  const EmpiricalEntropySource src(traj);
  const double cap = std::log(static_cast<double>(src.symbols().alphabet().size()));
  for (int v = 0; v < 4; ++v)
    for (unsigned mask = 0; mask < 16; ++mask) {
      if (mask & (1u << v)) continue;
      std::vector<int> q;
      for (int u = 0; u < 4; ++u)
        if (mask & (1u << u)) q.push_back(u);
      const double h = src.conditional_entropy(v, q);
      EXPECT_GE(h, -1e-12);
      EXPECT_LE(h, cap + 1e-12);
      for (int u = 0; u < 4; ++u) {
        if (u == v || (mask & (1u << u))) continue;
        auto qu = q;
        qu.insert(std::upper_bound(qu.begin(), qu.end(), u), u);
        EXPECT_LE(src.conditional_entropy(v, qu), h + 1e-12);
      }
    }
}

TEST(Estimator, OrderOfConditioningSetIrrelevant) {
  const auto traj = random_trajectory(4, 1, 1, 2000, 3);
  const EmpiricalEntropySource src(traj);
  const std::vector<int> a{1, 2, 3}, b{3, 1, 2};
  EXPECT_NEAR(src.conditional_entropy(0, a), src.conditional_entropy(0, b), 1e-12);
}

TEST(Estimator, MemoizedSourceCaches) {
  const auto traj = random_trajectory(3, 1, 0, 500, 2);
  const EmpiricalEntropySource src(traj);
  const MemoizedEntropySource memo(src);
  const std::vector<int> a{1, 2}, b{2, 1};
  EXPECT_EQ(memo.conditional_entropy(0, a), src.conditional_entropy(0, a));
  EXPECT_EQ(memo.conditional_entropy(0, b), src.conditional_entropy(0, a));
  EXPECT_EQ(memo.cache_size(), 1u);
}

}  // namespace
