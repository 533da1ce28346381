#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "battery.hpp"
#include "igl/error.hpp"
#include "igl/oracle.hpp"

using namespace igl;

namespace {

double binary_entropy(double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); }

ExactChain single_chain() {
  auto chain = build_exact_chain(igl::testing::make_model(1, 1, 0, {}));
  stationary(chain);
  return chain;
}

TEST(ExactChain, TwoStateTransitionMatrix) {
  const auto chain = single_chain();
  ASSERT_EQ(chain.state_count(), 2u);
  EXPECT_NEAR(chain.transition(0, 0), 0.84985, 1e-12);
  EXPECT_NEAR(chain.transition(0, 1), 0.15015, 1e-12);
  EXPECT_NEAR(chain.transition(1, 0), 0.44985, 1e-12);
  EXPECT_NEAR(chain.transition(1, 1), 0.55015, 1e-12);
}

TEST(ExactChain, TwoStateStationaryAndSpectrum) {
  const auto chain = single_chain();
  EXPECT_NEAR(chain.pi()[1], 0.25025, 1e-12);
  EXPECT_NEAR(chain.pi()[0], 0.74975, 1e-12);
  EXPECT_NEAR(second_eigenvalue(chain), 0.4, 1e-12);
}

TEST(ExactChain, TwoStateEntropy) {
  const auto chain = single_chain();
  const double expect = 0.74975 * binary_entropy(0.15015) + 0.25025 * binary_entropy(0.55015);
  const double h = exact_directed_conditional_entropy(chain, 0, {});
  EXPECT_NEAR(h, expect, 1e-12);
  EXPECT_NEAR(h, 0.489320344, 1e-9);
}

TEST(ExactChain, TvDecayMatchesSecondEigenvalue) {
  const auto chain = single_chain();
  const auto dist = tv_decay(chain, 30);
  EXPECT_NEAR(fit_geometric_rate(dist, 10, 30), 0.4, 0.02);
}

TEST(ExactChain, TruncatedPoissonMass) {
  const auto m0 = truncated_poisson_mass(0.7, 0);
  ASSERT_EQ(m0.size(), 1u);
  EXPECT_DOUBLE_EQ(m0[0], 1.0);
  const auto m2 = truncated_poisson_mass(0.5, 2);
  ASSERT_EQ(m2.size(), 3u);
  EXPECT_NEAR(m2[0], std::exp(-0.5), 1e-15);
  EXPECT_NEAR(m2[1], 0.5 * std::exp(-0.5), 1e-15);
  EXPECT_NEAR(m2[2], 1.0 - 1.5 * std::exp(-0.5), 1e-15);
  const auto z = truncated_poisson_mass(0.0, 3);
  EXPECT_DOUBLE_EQ(z[0], 1.0);
  EXPECT_DOUBLE_EQ(z[3], 0.0);
}

TEST(ExactChain, MBarZeroIgnoresRate) {
  const auto a = build_exact_chain(igl::testing::make_model(2, 1, 0, {{0, 1}}, AffineRate{0.0, 0.0}));
  const auto b = build_exact_chain(igl::testing::make_model(2, 1, 0, {{0, 1}}, AffineRate{3.0, 2.0}));
  ASSERT_EQ(a.state_count(), b.state_count());
  for (std::size_t i = 0; i < a.state_count(); ++i)
    for (std::size_t j = 0; j < a.state_count(); ++j) EXPECT_EQ(a.transition(i, j), b.transition(i, j));
}

TEST(Battery, RowsStationarityAndStructure) {
  for (auto inst : igl::testing::oracle_battery()) {
    SCOPED_TRACE(inst.name);
    auto chain = build_exact_chain(inst.spec);
    for (double r : chain.row_sums()) EXPECT_NEAR(r, 1.0, 1e-12);
    stationary(chain);
    EXPECT_LE(stationarity_residual(chain), 1e-10);
    double total = 0.0;
    for (double p : chain.pi()) {
      EXPECT_GE(p, -1e-15);
      total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    const double l = second_eigenvalue(chain);
    EXPECT_GE(l, 0.0);
    EXPECT_LT(l, 1.0);
  }
}

TEST(Battery, BruteForceRecoversTruth) {
  for (auto inst : igl::testing::oracle_battery()) {
    SCOPED_TRACE(inst.name);
    auto chain = build_exact_chain(inst.spec);
    stationary(chain);
    const auto found = brute_force_neighborhoods(chain);
    for (int v = 0; v < inst.spec.graph.node_count; ++v) EXPECT_EQ(found[v], inst.spec.graph.neighbors(v));
  }
}

TEST(Battery, ConditionalIndependenceAndMonotonicity) {
  for (auto inst : igl::testing::oracle_battery()) {
    SCOPED_TRACE(inst.name);
    auto chain = build_exact_chain(inst.spec);
    stationary(chain);
    EXPECT_LE(conditional_independence_check(chain).max_violation, 1e-9);
    const int n = chain.node_count();
    for (int v = 0; v < n; ++v)
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (mask & (1u << v)) continue;
        std::vector<int> q;
        for (int u = 0; u < n; ++u)
          if (mask & (1u << u)) q.push_back(u);
        const double h = exact_directed_conditional_entropy(chain, v, q);
        for (int u = 0; u < n; ++u) {
          if (u == v || (mask & (1u << u))) continue;
          auto qu = q;
          qu.insert(std::upper_bound(qu.begin(), qu.end(), u), u);
          EXPECT_LE(exact_directed_conditional_entropy(chain, v, qu), h + 1e-12);
        }
      }
  }
}

TEST(Battery, EntropyGapPositiveWhenEdgesExist) {
  for (auto inst : igl::testing::oracle_battery()) {
    SCOPED_TRACE(inst.name);
    auto chain = build_exact_chain(inst.spec);
    stationary(chain);
    const auto gap = entropy_gap(chain);
    EXPECT_EQ(gap.has_value(), inst.spec.graph.edge_count() > 0);
    if (gap) {
      EXPECT_GT(gap->gap, 1e-9);
    }
  }
}

TEST(Eigen, DenseAndSubspaceAgree) {
  for (auto inst : igl::testing::oracle_battery()) {
    auto chain = build_exact_chain(inst.spec);
    if (chain.state_count() <= 4 || chain.state_count() > kMaxDenseStates) continue;
    SCOPED_TRACE(inst.name);
    const double dense = second_eigenvalue(chain, EigenMethod::dense);
    const double sub = second_eigenvalue(chain, EigenMethod::subspace);
    EXPECT_NEAR(dense, sub, 1e-8);
  }
}

TEST(Eigen, LargeChainUsesIterativePaths) {
  // 4 nodes, d=2, m_bar=1: 3^8 = 6561 states, above the dense limit.
  auto chain = build_exact_chain(igl::testing::make_model(4, 2, 1, {{0, 1}, {1, 2}, {2, 3}}, AffineRate{0.5, 1.0}));
  ASSERT_GT(chain.state_count(), kMaxDenseStates);
  stationary(chain);
  EXPECT_LE(stationarity_residual(chain), 1e-10);
  const double l = second_eigenvalue(chain);
  EXPECT_GT(l, 0.0);
  EXPECT_LT(l, 1.0);
  EXPECT_THROW(second_eigenvalue(chain, EigenMethod::dense), Error);
}

TEST(Guards, StateSpaceTooLarge) {
  try {
    build_exact_chain(igl::testing::make_model(15, 1, 0, {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StateSpaceTooLarge);
  }
}

TEST(Guards, NotIrreducible) {
  auto spec = igl::testing::make_model(2, 1, 0, {{0, 1}});
  for (auto& n : spec.graph.nodes) n.bias = 0.0;  // Z = 0 and Y = 0 then give X = 0
  auto chain = build_exact_chain(spec);
  try {
    stationary(chain);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotIrreducible);
  }
}

TEST(Report, SpectralBoundIsReportedNotAsserted) {
  const auto chain = single_chain();
  const auto r = spectral_bound_report(chain);
  EXPECT_NEAR(r.lambda_star, 0.4, 1e-12);
  EXPECT_NEAR(r.bound, 2.0 * (0.5 + 0.3) * 0.4, 1e-12);
  EXPECT_EQ(r.holds, r.lambda_star <= r.bound);
}

TEST(Report, AnalyzeSerializes) {
  auto chain = build_exact_chain(igl::testing::make_model(2, 1, 0, {{0, 1}}));
  const auto report = analyze(chain);
  const auto doc = to_json(report);
  EXPECT_EQ(doc["state_count"], 4);
  EXPECT_EQ(report.brute_force[1], std::vector<int>{0});
  EXPECT_LE(report.residual, 1e-10);
}

}  // namespace
