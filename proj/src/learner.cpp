#include "igl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "igl/bounds.hpp"
#include "igl/error.hpp"

namespace igl {

LearnerConfig LearnerConfig::with_default_cap(double epsilon, unsigned m_bar) {
  LearnerConfig c;
  c.epsilon = epsilon;
  c.pmax_cap = pmax_bound(m_bar, epsilon).cap;
  return c;
}

void LearnerConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorCode::ParamOutOfRange, "epsilon must be positive");
  if (pmax_cap < 1) throw Error(ErrorCode::ParamOutOfRange, "pmax_cap must be >= 1");
}

const char* to_string(InnerExit exit) {
  switch (exit) {
    case InnerExit::below_threshold: return "below_threshold";
    case InnerExit::candidates_exhausted: return "candidates_exhausted";
    case InnerExit::cap_reached: return "cap_reached";
  }
  return "unknown";
}

bool NeighborhoodEstimate::cap_warning() const {
  return std::any_of(nodes.begin(), nodes.end(), [](const NodeEstimate& n) { return n.cap_warning; });
}

NodeEstimate rec_greedy_node(const ConditionalEntropySource& source, int v,
                             const LearnerConfig& config) {
  config.validate();
  const int n = source.node_count();
  const double threshold = config.epsilon / 2.0;

  std::map<std::vector<int>, double> memo;
  auto h = [&](const std::vector<int>& cond) {
    const auto it = memo.find(cond);
    if (it != memo.end()) return it->second;
    const double value = source.conditional_entropy(v, cond);
    memo.emplace(cond, value);
    return value;
  };

  NodeEstimate est;
  est.node = v;
  std::vector<int>& accepted = est.parents;
  for (int round_no = 0; round_no <= n; ++round_no) {
    GreedyRound round;
    std::vector<int> working = accepted;
    for (;;) {
      std::vector<int> candidates;
      for (int k = 0; k < n; ++k)
        if (k != v && !std::binary_search(working.begin(), working.end(), k)) candidates.push_back(k);
      if (candidates.empty()) {
        round.exit = InnerExit::candidates_exhausted;
        break;
      }
      if (working.size() + 1 > config.pmax_cap) {
        round.exit = InnerExit::cap_reached;
        est.cap_warning = true;
        break;
      }
      const double base = h(working);
      GreedyStep step;
      step.delta = -std::numeric_limits<double>::infinity();
      step.cond_size = working.size() + 1;
      std::vector<int> extended;
      for (int k : candidates) {
        extended = working;
        extended.insert(std::upper_bound(extended.begin(), extended.end(), k), k);
        const double delta = base - h(extended);
        if (delta > step.delta) {  // strict: ties keep the lowest id
          step.delta = delta;
          step.candidate = k;
        }
      }
      est.max_cond_set = std::max(est.max_cond_set, step.cond_size);
      step.accepted = step.delta > threshold;
      round.steps.push_back(step);
      if (!step.accepted) {
        round.exit = InnerExit::below_threshold;
        break;
      }
      working.insert(std::upper_bound(working.begin(), working.end(), step.candidate),
                     step.candidate);
      round.last_node = step.candidate;
    }
    const bool changed = round.last_node.has_value();
    if (changed)
      accepted.insert(std::upper_bound(accepted.begin(), accepted.end(), *round.last_node),
                      *round.last_node);
    est.rounds.push_back(std::move(round));
    if (!changed) break;
  }
  return est;
}

NeighborhoodEstimate rec_greedy(const ConditionalEntropySource& source, const LearnerConfig& config) {
  config.validate();
  NeighborhoodEstimate out;
  out.epsilon = config.epsilon;
  out.pmax_cap = config.pmax_cap;
  out.nodes.reserve(source.node_count());
  for (int v = 0; v < source.node_count(); ++v) out.nodes.push_back(rec_greedy_node(source, v, config));
  return out;
}

NeighborhoodEstimate rec_greedy(const Trajectory& traj, const LearnerConfig& config) {
  if (traj.length() < static_cast<std::size_t>(traj.d()) + 1) {
    throw Error(ErrorCode::TooShort, "need T >= d+1 (T=" + std::to_string(traj.length()) +
                                         ", d=" + std::to_string(traj.d()) + ")");
  }
  const EmpiricalEntropySource source(traj);
  return rec_greedy(source, config);
}

bool perfect_recovery(const NeighborhoodEstimate& estimate, const InfluenceGraph& graph) {
  if (estimate.nodes.size() != static_cast<std::size_t>(graph.node_count)) return false;
  for (int v = 0; v < graph.node_count; ++v)
    if (estimate.parents(v) != graph.neighbors(v)) return false;
  return true;
}

double EdgeScore::precision() const {
  const auto called = true_positive + false_positive;
  return called == 0 ? 1.0 : static_cast<double>(true_positive) / static_cast<double>(called);
}

double EdgeScore::recall() const {
  const auto actual = true_positive + false_negative;
  return actual == 0 ? 1.0 : static_cast<double>(true_positive) / static_cast<double>(actual);
}

EdgeScore score_edges(const NeighborhoodEstimate& estimate, const InfluenceGraph& graph) {
  EdgeScore s;
  for (int v = 0; v < graph.node_count; ++v) {
    const auto truth = graph.neighbors(v);
    const auto& got = estimate.parents(v);
    for (int u : got) {
      if (std::binary_search(truth.begin(), truth.end(), u))
        ++s.true_positive;
      else
        ++s.false_positive;
    }
    for (int u : truth)
      if (!std::binary_search(got.begin(), got.end(), u)) ++s.false_negative;
  }
  return s;
}

nlohmann::json to_json(const NeighborhoodEstimate& est, bool with_trace) {
  nlohmann::json doc = {{"epsilon", est.epsilon}, {"pmax_cap", est.pmax_cap}};
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : est.nodes) {
    nlohmann::json j = {{"node", n.node},
                        {"parents", n.parents},
                        {"rounds", n.rounds.size()},
                        {"max_cond_set", n.max_cond_set},
                        {"cap_warning", n.cap_warning}};
    if (with_trace) {
      nlohmann::json rounds = nlohmann::json::array();
      for (const auto& r : n.rounds) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : r.steps)
          steps.push_back({{"candidate", s.candidate},
                           {"delta", s.delta},
                           {"accepted", s.accepted},
                           {"cond_size", s.cond_size}});
        rounds.push_back({{"steps", std::move(steps)},
                          {"exit", to_string(r.exit)},
                          {"last_node", r.last_node ? nlohmann::json(*r.last_node) : nlohmann::json()}});
      }
      j["trace"] = std::move(rounds);
    }
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

std::string summary_csv(const NeighborhoodEstimate& est) {
  std::ostringstream os;
  os << "node,parents,rounds,max_cond_set\n";
  for (const auto& n : est.nodes) {
    os << n.node << ',';
    for (std::size_t i = 0; i < n.parents.size(); ++i) os << (i ? ";" : "") << n.parents[i];
    os << ',' << n.rounds.size() << ',' << n.max_cond_set << '\n';
  }
  return os.str();
}

}  // namespace igl
