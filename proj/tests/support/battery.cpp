#include "battery.hpp"

#include <algorithm>

namespace igl::testing {

ModelSpec make_model(int node_count, int d, unsigned m_bar,
                     const std::vector<std::pair<int, int>>& edges, AffineRate mu) {
  ModelSpec spec;
  auto& g = spec.graph;
  g.node_count = node_count;
  g.d = d;
  g.beta = 0.75;
  g.nodes.assign(node_count, NodeParams{0.4, 0.167, NoiseSpec::bernoulli(0.5)});
  g.in_edges.assign(node_count, {});
  std::vector<std::vector<int>> sources(node_count);
  for (int v = 0; v < node_count; ++v) sources[v].push_back(v);
  for (auto [from, to] : edges) sources[to].push_back(from);
  for (int v = 0; v < node_count; ++v) {
    auto& s = sources[v];
    std::sort(s.begin(), s.end());
    const double w = 1.0 / (static_cast<double>(s.size()) * d);
    for (int u : s) g.in_edges[v].push_back({u, std::vector<double>(d, w)});
  }
  spec.obs.m_bar = m_bar;
  spec.obs.mu = mu;
  return validate(spec);
}

std::vector<BatteryInstance> oracle_battery() {
  const std::vector<std::pair<int, int>> line3{{0, 1}, {1, 2}};
  const std::vector<std::pair<int, int>> ring3{{0, 1}, {1, 2}, {2, 0}};
  return {
      {"single_d1_m0", make_model(1, 1, 0, {})},
      {"self_loops_d1_m0", make_model(2, 1, 0, {})},
      {"pair_d1_m0", make_model(2, 1, 0, {{0, 1}})},
      {"pair_d1_m2", make_model(2, 1, 2, {{0, 1}}, {0.5, 1.0})},
      {"pair_d2_m1", make_model(2, 2, 1, {{0, 1}})},
      {"line3_d1_m0", make_model(3, 1, 0, line3)},
      {"ring3_d1_m0", make_model(3, 1, 0, ring3)},
      {"ring3_d2_m0", make_model(3, 2, 0, ring3)},
      {"line3_d1_m2", make_model(3, 1, 2, line3)},
      {"tree3_d2_m1", make_model(3, 2, 1, {{0, 1}, {0, 2}})},
      {"ring3_d2_m2", make_model(3, 2, 2, ring3)},
      {"collider3_d2_m0", make_model(3, 2, 0, {{0, 2}, {1, 2}})},
  };
}

}  // namespace igl::testing
