#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace igl {

// N/M in lowest terms. Alphabet values are kept exact so distribution keys
// never depend on floating-point rounding.
struct Rational {
  std::uint32_t num = 0;
  std::uint32_t den = 1;

  static Rational reduced(std::uint32_t n, std::uint32_t m);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return static_cast<std::uint64_t>(a.num) * b.den <=> static_cast<std::uint64_t>(b.num) * a.den;
  }
};

std::string to_string(const Rational& r);

// The set of achievable observed fractions N/M, 1 <= M <= m_bar+1, sorted
// ascending. Symbols throughout the library are indices into this set.
class Alphabet {
 public:
  static constexpr unsigned kMaxMBar = 254;

  explicit Alphabet(unsigned m_bar);

  unsigned m_bar() const { return m_bar_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<Rational>& values() const { return values_; }
  double value(std::size_t symbol) const { return numeric_[symbol]; }

  // Symbol for the observation pair (n, m); requires 1 <= m <= m_bar+1, n <= m.
  std::uint16_t symbol(unsigned n, unsigned m) const { return table_[m * (m + 1) / 2 + n - 1]; }
  bool contains(const Rational& r) const;

  // Upper bound m(m+1)/2 + 2 on the alphabet size.
  static std::uint64_t size_bound(unsigned m_bar) {
    return static_cast<std::uint64_t>(m_bar) * (m_bar + 1) / 2 + 2;
  }

 private:
  unsigned m_bar_;
  std::vector<Rational> values_;
  std::vector<double> numeric_;
  std::vector<std::uint16_t> table_;  // triangular (m, n) -> symbol
};

Alphabet support_alphabet(unsigned m_bar);

// Finite-support noise Z_v on [0,1].
struct NoiseSpec {
  std::vector<double> support;
  std::vector<double> probs;

  static NoiseSpec bernoulli(double p);
  static NoiseSpec constant(double z);
  double mean() const;
  double min() const;
  double max() const;
};

struct NodeParams {
  double alpha = 0.4;  // openness, (0,1)
  double bias = 0.0;   // inner bias l_v, [0,1]
  NoiseSpec noise = NoiseSpec::bernoulli(0.5);
  double zbar() const { return noise.mean(); }
};

struct InEdge {
  int from = 0;
  std::vector<double> weights;  // one per lag r = 0..d-1
};

// Directed influence graph with per-lag weights; in_edges[v] lists every
// (u, v) edge including the self-loop, sorted by source.
struct InfluenceGraph {
  int node_count = 0;
  int d = 1;
  double beta = 0.75;
  std::vector<NodeParams> nodes;
  std::vector<std::vector<InEdge>> in_edges;

  // N_v: sources of in-edges other than v, ascending.
  std::vector<int> neighbors(int v) const;
  bool has_edge(int from, int to) const;
  double weight(int from, int to, int lag) const;  // 0 for absent edges
  std::size_t edge_count() const;                  // excludes self-loops
};

// mu(x) = max(0, c0 + c1 * x).
struct AffineRate {
  double c0 = 0.0;
  double c1 = 0.0;

  double operator()(double x) const {
    const double v = c0 + c1 * x;
    return v > 0.0 ? v : 0.0;
  }
  double sup() const;  // over [0,1]
  double lipschitz() const;
};

struct ObsParams {
  unsigned m_bar = 0;
  AffineRate mu;
  std::vector<AffineRate> per_node;  // optional override, empty or node_count entries

  const AffineRate& rate(int v) const { return per_node.empty() ? mu : per_node[v]; }
  double lipschitz() const;  // L
  double mu_bar() const;     // max_v sup_x mu_v(x)
};

struct ModelSpec {
  InfluenceGraph graph;
  ObsParams obs;
};

constexpr double kWeightSumTolerance = 1e-9;

// Throws ValidationError listing every violated invariant.
const InfluenceGraph& validate_graph(const InfluenceGraph& graph);
const ObsParams& validate_obs(const ObsParams& obs, int node_count);
const ModelSpec& validate(const ModelSpec& spec);

// True when every noise outcome keeps X_v strictly inside (0,1) for any
// observation history, which makes the observation chain irreducible.
bool interior_dynamics(const InfluenceGraph& graph);

enum class Topology { line, tree, ring, random_bounded };

Topology parse_topology(std::string_view name);
const char* to_string(Topology topology);

struct GeneratorParams {
  Topology topology = Topology::line;
  int node_count = 7;
  int d = 1;
  double alpha = 0.4;
  double beta = 0.75;
  double bias = 0.167;
  int degree_cap = 0;  // random_bounded only
  std::uint64_t seed = 0;
  NoiseSpec noise = NoiseSpec::bernoulli(0.5);
};

// Unit weight mass per node split uniformly over its (|N_v|+1)*d weights.
InfluenceGraph generate(const GeneratorParams& params);

// Graph file (JSON) round trip.
nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_from_json(const nlohmann::json& doc);
ModelSpec read_model_file(const std::filesystem::path& path);
void write_model_file(const std::filesystem::path& path, const ModelSpec& spec);

// Stable 64-bit FNV-1a digest of the canonical JSON form, as hex.
std::string digest(const ModelSpec& spec);

}  // namespace igl
