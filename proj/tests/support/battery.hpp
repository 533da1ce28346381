#pragma once

#include <string>
#include <utility>
#include <vector>

#include "igl/model.hpp"

namespace igl::testing {

// Graph with the default simulation parameters (alpha 0.4, beta 0.75,
// bias 0.167, Bernoulli(0.5) noise) and uniform weights over the
// (|N_v|+1)*d incoming weights of every node.
ModelSpec make_model(int node_count, int d, unsigned m_bar,
                     const std::vector<std::pair<int, int>>& edges, AffineRate mu = {0.2, 0.3});

struct BatteryInstance {
  std::string name;
  ModelSpec spec;
};

// Twelve oracle-tractable instances, |V| <= 3, d <= 2, m_bar <= 2.
std::vector<BatteryInstance> oracle_battery();

}  // namespace igl::testing
