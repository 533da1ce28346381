#include "igl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "igl/error.hpp"

namespace igl {

Rational Rational::reduced(std::uint32_t n, std::uint32_t m) {
  if (n == 0) return {0, 1};
  const std::uint32_t g = std::gcd(n, m);
  return {n / g, m / g};
}

std::string to_string(const Rational& r) {
  if (r.den == 1) return std::to_string(r.num);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

Alphabet::Alphabet(unsigned m_bar) : m_bar_(m_bar) {
  if (m_bar > kMaxMBar) {
    throw Error(ErrorCode::ParamOutOfRange, "m_bar must be <= " + std::to_string(kMaxMBar));
  }
  std::set<Rational> unique;
  for (unsigned m = 1; m <= m_bar + 1; ++m)
    for (unsigned n = 0; n <= m; ++n) unique.insert(Rational::reduced(n, m));
  values_.assign(unique.begin(), unique.end());
  numeric_.reserve(values_.size());
  for (const auto& r : values_) numeric_.push_back(r.value());

  const unsigned top = m_bar + 1;
  table_.assign((top + 1) * (top + 2) / 2, 0);
  for (unsigned m = 1; m <= top; ++m) {
    for (unsigned n = 0; n <= m; ++n) {
      const auto it = std::lower_bound(values_.begin(), values_.end(), Rational::reduced(n, m));
      table_[m * (m + 1) / 2 + n - 1] = static_cast<std::uint16_t>(it - values_.begin());
    }
  }
}

bool Alphabet::contains(const Rational& r) const {
  return std::binary_search(values_.begin(), values_.end(), r);
}

Alphabet support_alphabet(unsigned m_bar) { return Alphabet(m_bar); }

NoiseSpec NoiseSpec::bernoulli(double p) { return {{0.0, 1.0}, {1.0 - p, p}}; }

NoiseSpec NoiseSpec::constant(double z) { return {{z}, {1.0}}; }

double NoiseSpec::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) m += support[i] * probs[i];
  return m;
}

double NoiseSpec::min() const {
  double lo = 1.0;
  for (std::size_t i = 0; i < support.size(); ++i)
    if (probs[i] > 0.0) lo = std::min(lo, support[i]);
  return lo;
}

double NoiseSpec::max() const {
  double hi = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i)
    if (probs[i] > 0.0) hi = std::max(hi, support[i]);
  return hi;
}

std::vector<int> InfluenceGraph::neighbors(int v) const {
  std::vector<int> out;
  for (const auto& e : in_edges[v])
    if (e.from != v) out.push_back(e.from);
  return out;
}

bool InfluenceGraph::has_edge(int from, int to) const {
  const auto& edges = in_edges[to];
  return std::any_of(edges.begin(), edges.end(), [&](const InEdge& e) { return e.from == from; });
}

double InfluenceGraph::weight(int from, int to, int lag) const {
  for (const auto& e : in_edges[to])
    if (e.from == from) return e.weights[lag];
  return 0.0;
}

std::size_t InfluenceGraph::edge_count() const {
  std::size_t n = 0;
  for (int v = 0; v < node_count; ++v) n += neighbors(v).size();
  return n;
}

double AffineRate::sup() const { return std::max((*this)(0.0), (*this)(1.0)); }

double AffineRate::lipschitz() const { return std::abs(c1); }

double ObsParams::lipschitz() const {
  double l = mu.lipschitz();
  if (!per_node.empty()) {
    l = 0.0;
    for (const auto& r : per_node) l = std::max(l, r.lipschitz());
  }
  return l;
}

double ObsParams::mu_bar() const {
  double m = mu.sup();
  if (!per_node.empty()) {
    m = 0.0;
    for (const auto& r : per_node) m = std::max(m, r.sup());
  }
  return m;
}

namespace {

bool open_unit(double x) { return std::isfinite(x) && x > 0.0 && x < 1.0; }
bool closed_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

void range_issue(std::vector<Issue>& out, int node, const std::string& field, double value,
                 const std::string& msg) {
  out.push_back({ErrorCode::ParamOutOfRange, node, -1, field, value, msg});
}

}  // namespace

const InfluenceGraph& validate_graph(const InfluenceGraph& g) {
  std::vector<Issue> issues;
  if (g.node_count < 1) range_issue(issues, -1, "node_count", g.node_count, "must be >= 1");
  if (g.d < 1) range_issue(issues, -1, "d", g.d, "must be >= 1");
  if (!open_unit(g.beta)) range_issue(issues, -1, "beta", g.beta, "must lie in (0,1)");
  if (g.nodes.size() != static_cast<std::size_t>(std::max(g.node_count, 0)) ||
      g.in_edges.size() != g.nodes.size()) {
    range_issue(issues, -1, "nodes", static_cast<double>(g.nodes.size()),
                "node and edge tables must have node_count entries");
    throw ValidationError(std::move(issues));
  }
  if (!issues.empty() && (g.node_count < 1 || g.d < 1)) throw ValidationError(std::move(issues));

  for (int v = 0; v < g.node_count; ++v) {
    const auto& p = g.nodes[v];
    if (!open_unit(p.alpha)) range_issue(issues, v, "alpha", p.alpha, "must lie in (0,1)");
    if (!closed_unit(p.bias)) range_issue(issues, v, "bias", p.bias, "must lie in [0,1]");

    const auto& z = p.noise;
    if (z.support.empty() || z.support.size() != z.probs.size()) {
      range_issue(issues, v, "noise", static_cast<double>(z.support.size()),
                  "support and probs must be non-empty and the same length");
    } else {
      double total = 0.0;
      bool ok = true;
      for (std::size_t i = 0; i < z.support.size(); ++i) {
        ok = ok && closed_unit(z.support[i]) && std::isfinite(z.probs[i]) && z.probs[i] >= 0.0;
        total += z.probs[i];
      }
      if (!ok) range_issue(issues, v, "noise", 0.0, "support must lie in [0,1], probs >= 0");
      if (std::abs(total - 1.0) > kWeightSumTolerance)
        range_issue(issues, v, "noise.probs", total, "must sum to 1");
      if (ok && !open_unit(z.mean())) range_issue(issues, v, "zbar", z.mean(), "must lie in (0,1)");
    }

    bool self = false;
    double sum = 0.0;
    std::set<int> seen;
    for (const auto& e : g.in_edges[v]) {
      if (e.from < 0 || e.from >= g.node_count) {
        issues.push_back({ErrorCode::ParamOutOfRange, v, e.from, "from", double(e.from),
                          "edge source out of range"});
        continue;
      }
      if (!seen.insert(e.from).second) {
        issues.push_back({ErrorCode::ParamOutOfRange, v, e.from, "edges", 0.0, "duplicate edge"});
      }
      if (e.from == v) self = true;
      if (e.weights.size() != static_cast<std::size_t>(g.d)) {
        issues.push_back({ErrorCode::ParamOutOfRange, v, e.from, "weights",
                          double(e.weights.size()), "need one weight per lag"});
        continue;
      }
      double edge_total = 0.0;
      for (double w : e.weights) {
        if (!std::isfinite(w) || w < 0.0) {
          issues.push_back({ErrorCode::ParamOutOfRange, v, e.from, "weights", w,
                            "weights must be nonnegative"});
        }
        edge_total += w;
        sum += w;
      }
      if (edge_total <= 0.0) {
        issues.push_back({ErrorCode::ParamOutOfRange, v, e.from, "weights", edge_total,
                          "absent edges must be omitted, not stored as zero"});
      }
    }
    if (!self) issues.push_back({ErrorCode::MissingSelfLoop, v, v, "", 0.0, "self-edge required"});
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
      issues.push_back({ErrorCode::WeightSumViolation, v, -1, "weights", sum,
                        "sum over lags and sources must be 1"});
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return g;
}

const ObsParams& validate_obs(const ObsParams& obs, int node_count) {
  std::vector<Issue> issues;
  if (obs.m_bar > Alphabet::kMaxMBar) range_issue(issues, -1, "m_bar", obs.m_bar, "too large");
  auto check = [&](const AffineRate& r, int v) {
    if (!std::isfinite(r.c0) || r.c0 < 0.0) range_issue(issues, v, "mu_c0", r.c0, "must be >= 0");
    if (!std::isfinite(r.c1)) range_issue(issues, v, "mu_c1", r.c1, "must be finite");
  };
  check(obs.mu, -1);
  if (!obs.per_node.empty()) {
    if (obs.per_node.size() != static_cast<std::size_t>(node_count))
      range_issue(issues, -1, "mu", double(obs.per_node.size()), "per-node override size");
    for (std::size_t v = 0; v < obs.per_node.size(); ++v) check(obs.per_node[v], int(v));
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return obs;
}

const ModelSpec& validate(const ModelSpec& spec) {
  std::vector<Issue> issues;
  try {
    validate_graph(spec.graph);
  } catch (const ValidationError& e) {
    issues = e.issues();
  }
  try {
    validate_obs(spec.obs, spec.graph.node_count);
  } catch (const ValidationError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return spec;
}

bool interior_dynamics(const InfluenceGraph& g) {
  for (int v = 0; v < g.node_count; ++v) {
    const auto& p = g.nodes[v];
    const double lo = (1.0 - p.alpha) * ((1.0 - g.beta) * p.noise.min() + g.beta * p.bias);
    const double hi = (1.0 - p.alpha) * ((1.0 - g.beta) * p.noise.max() + g.beta * p.bias) + p.alpha;
    if (!(lo > 0.0 && hi < 1.0)) return false;
  }
  return true;
}

Topology parse_topology(std::string_view name) {
  if (name == "line") return Topology::line;
  if (name == "tree") return Topology::tree;
  if (name == "ring") return Topology::ring;
  if (name == "random_bounded" || name == "random") return Topology::random_bounded;
  throw Error(ErrorCode::InvalidTopologyParams, "unknown topology '" + std::string(name) + "'");
}

const char* to_string(Topology t) {
  switch (t) {
    case Topology::line: return "line";
    case Topology::tree: return "tree";
    case Topology::ring: return "ring";
    case Topology::random_bounded: return "random_bounded";
  }
  return "unknown";
}

InfluenceGraph generate(const GeneratorParams& p) {
  if (p.node_count < 1) throw Error(ErrorCode::InvalidTopologyParams, "node_count must be >= 1");
  if (p.d < 1) throw Error(ErrorCode::InvalidTopologyParams, "d must be >= 1");
  if (p.degree_cap < 0) throw Error(ErrorCode::InvalidTopologyParams, "degree_cap must be >= 0");

  const int n = p.node_count;
  std::vector<std::vector<int>> parents(n);
  switch (p.topology) {
    case Topology::line:
      for (int v = 1; v < n; ++v) parents[v] = {v - 1};
      break;
    case Topology::tree:  // binary heap layout, edges point from parent to child
      for (int v = 1; v < n; ++v) parents[v] = {(v - 1) / 2};
      break;
    case Topology::ring:
      if (n > 1)
        for (int v = 0; v < n; ++v) parents[v] = {(v + n - 1) % n};
      break;
    case Topology::random_bounded: {
      std::mt19937_64 rng(p.seed);
      const int cap = std::min(p.degree_cap, n - 1);
      std::vector<int> pool;
      for (int v = 0; v < n; ++v) {
        pool.clear();
        for (int u = 0; u < n; ++u)
          if (u != v) pool.push_back(u);
        const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(cap + 1));
        for (int i = 0; i < k; ++i) {  // partial Fisher-Yates
          const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(pool.size() - i));
          std::swap(pool[i], pool[j]);
        }
        parents[v].assign(pool.begin(), pool.begin() + k);
        std::sort(parents[v].begin(), parents[v].end());
      }
      break;
    }
  }

  InfluenceGraph g;
  g.node_count = n;
  g.d = p.d;
  g.beta = p.beta;
  g.nodes.assign(n, NodeParams{p.alpha, p.bias, p.noise});
  g.in_edges.resize(n);
  for (int v = 0; v < n; ++v) {
    std::vector<int> sources = parents[v];
    sources.push_back(v);
    std::sort(sources.begin(), sources.end());
    const double w = 1.0 / static_cast<double>(sources.size() * static_cast<std::size_t>(p.d));
    for (int u : sources) g.in_edges[v].push_back({u, std::vector<double>(p.d, w)});
  }
  return g;
}

}  // namespace igl
