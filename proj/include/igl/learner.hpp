#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igl/dynamics.hpp"
#include "igl/estimation.hpp"
#include "igl/model.hpp"

namespace igl {

struct LearnerConfig {
  double epsilon = 0.1;       // acceptance threshold is epsilon / 2
  std::size_t pmax_cap = 1;   // cap on the working set size |U(v)|

  // pmax_cap from the |P|max bound for this epsilon and alphabet.
  static LearnerConfig with_default_cap(double epsilon, unsigned m_bar);
  void validate() const;
};

enum class InnerExit { below_threshold, candidates_exhausted, cap_reached };

const char* to_string(InnerExit exit);

struct GreedyStep {
  int candidate = -1;         // argmax candidate
  double delta = 0.0;         // H(v+|v,U) - H(v+|v,U,candidate)
  bool accepted = false;
  std::size_t cond_size = 0;  // |U| + 1 at evaluation time
};

struct GreedyRound {
  std::vector<GreedyStep> steps;
  InnerExit exit = InnerExit::below_threshold;
  std::optional<int> last_node;
};

struct NodeEstimate {
  int node = 0;
  std::vector<int> parents;  // final T(v), ascending
  std::vector<GreedyRound> rounds;
  std::size_t max_cond_set = 0;
  bool cap_warning = false;
};

struct NeighborhoodEstimate {
  double epsilon = 0.0;
  std::size_t pmax_cap = 0;
  std::vector<NodeEstimate> nodes;

  const std::vector<int>& parents(int v) const { return nodes[v].parents; }
  bool cap_warning() const;
};

// Greedy neighbourhood construction for a single node. Depends only on the
// source and the config.
NodeEstimate rec_greedy_node(const ConditionalEntropySource& source, int v,
                             const LearnerConfig& config);

NeighborhoodEstimate rec_greedy(const ConditionalEntropySource& source, const LearnerConfig& config);

// Plug-in estimates from the trajectory. Throws TooShort when T < d+1.
NeighborhoodEstimate rec_greedy(const Trajectory& traj, const LearnerConfig& config);

// T(v) == N_v for every node.
bool perfect_recovery(const NeighborhoodEstimate& estimate, const InfluenceGraph& graph);

struct EdgeScore {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  double precision() const;
  double recall() const;
};

EdgeScore score_edges(const NeighborhoodEstimate& estimate, const InfluenceGraph& graph);

nlohmann::json to_json(const NeighborhoodEstimate& estimate, bool with_trace);
// `node,parents,rounds,max_cond_set`; parents separated by ';'.
std::string summary_csv(const NeighborhoodEstimate& estimate);

}  // namespace igl
