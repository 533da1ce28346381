#include "igl/dynamics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "igl/error.hpp"

namespace igl {

Trajectory::Trajectory(int node_count, int d, unsigned m_bar, std::size_t length)
    : node_count_(node_count),
      d_(d),
      m_bar_(m_bar),
      length_(length),
      n_(static_cast<std::size_t>(node_count) * length, 0),
      m_(static_cast<std::size_t>(node_count) * length, 1) {}

void Trajectory::set(std::size_t t, int v, unsigned n, unsigned m) {
  if (m < 1 || m > m_bar_ + 1 || n > m) {
    throw Error(ErrorCode::ParamOutOfRange, "observation (" + std::to_string(n) + "," +
                                                std::to_string(m) + ") outside the support");
  }
  n_[index(t, v)] = static_cast<std::uint8_t>(n);
  m_[index(t, v)] = static_cast<std::uint8_t>(m);
}

Simulator::Simulator(ModelSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  const auto& g = spec_.graph;
  terms_.resize(g.node_count);
  drift_scale_.resize(g.node_count);
  drift_base_.resize(g.node_count);
  for (int v = 0; v < g.node_count; ++v) {
    const auto& p = g.nodes[v];
    for (const auto& e : g.in_edges[v])
      for (int r = 0; r < g.d; ++r)
        if (e.weights[r] > 0.0) terms_[v].push_back({e.from, r, p.alpha * e.weights[r]});
    drift_scale_[v] = (1.0 - p.alpha) * (1.0 - g.beta);
    drift_base_[v] = (1.0 - p.alpha) * g.beta * p.bias;
  }
}

State Simulator::initial_state() const {
  const auto& g = spec_.graph;
  State s;
  s.d = g.d;
  s.node_count = g.node_count;
  s.x.assign(g.node_count, 0.0);
  s.history.resize(static_cast<std::size_t>(g.d) * g.node_count);
  for (int r = 0; r < g.d; ++r)
    for (int v = 0; v < g.node_count; ++v) s.history[r * g.node_count + v] = g.nodes[v].zbar();
  return s;
}

double Simulator::expected_x(const State& state, int v) const {
  double x = drift_scale_[v] * spec_.graph.nodes[v].zbar() + drift_base_[v];
  for (const auto& t : terms_[v]) x += t.weight * state.lagged(t.source, t.lag);
  return x;
}

void Simulator::step(State& state, Rng& rng, std::span<std::uint8_t> n_out,
                     std::span<std::uint8_t> m_out) const {
  const auto& g = spec_.graph;
  const unsigned m_bar = spec_.obs.m_bar;
  for (int v = 0; v < g.node_count; ++v) {
    const auto& noise = g.nodes[v].noise;
    const double z = noise.support[sample_discrete(rng, noise.probs)];
    double x = drift_scale_[v] * z + drift_base_[v];
    for (const auto& t : terms_[v]) x += t.weight * state.lagged(t.source, t.lag);
    x = std::clamp(x, 0.0, 1.0);
    state.x[v] = x;
    const unsigned m = m_bar == 0 ? 1u : sample_poisson_capped(rng, spec_.obs.rate(v)(x), m_bar) + 1u;
    const unsigned n = sample_binomial(rng, m, x);
    n_out[v] = static_cast<std::uint8_t>(n);
    m_out[v] = static_cast<std::uint8_t>(m);
  }
  // Shift: the new row becomes lag 0.
  state.head = (state.head + state.d - 1) % state.d;
  double* row = state.history.data() + static_cast<std::size_t>(state.head) * state.node_count;
  for (int v = 0; v < g.node_count; ++v)
    row[v] = static_cast<double>(n_out[v]) / static_cast<double>(m_out[v]);
}

Trajectory simulate(const ModelSpec& spec, std::size_t length, std::size_t burn_in,
                    std::uint64_t seed) {
  if (length < static_cast<std::size_t>(std::max(spec.graph.d, 1))) {
    throw Error(ErrorCode::TooShort, "trajectory length " + std::to_string(length) +
                                         " is shorter than d=" + std::to_string(spec.graph.d));
  }
  const Simulator sim(spec);
  const int n_nodes = spec.graph.node_count;
  Trajectory traj(n_nodes, spec.graph.d, spec.obs.m_bar, length);
  traj.metadata = {seed, burn_in, digest(spec)};

  Rng rng(derive_seed(seed, Stream::simulate, 0));
  State state = sim.initial_state();
  std::vector<std::uint8_t> n(n_nodes), m(n_nodes);
  for (std::size_t t = 0; t < burn_in; ++t) sim.step(state, rng, n, m);
  for (std::size_t t = 0; t < length; ++t) {
    sim.step(state, rng, n, m);
    for (int v = 0; v < n_nodes; ++v) traj.set(t, v, n[v], m[v]);
  }
  return traj;
}

std::filesystem::path metadata_path(const std::filesystem::path& csv) {
  return std::filesystem::path(csv.string() + ".meta.json");
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  std::string buf;
  buf.reserve(1 << 16);
  buf += "t,node,N,M\n";
  for (std::size_t t = 0; t < traj.length(); ++t) {
    for (int v = 0; v < traj.node_count(); ++v) {
      buf += std::to_string(t);
      buf += ',';
      buf += std::to_string(v);
      buf += ',';
      buf += std::to_string(traj.n(t, v));
      buf += ',';
      buf += std::to_string(traj.m(t, v));
      buf += '\n';
    }
    if (buf.size() > (1 << 16) - 128) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;

  nlohmann::json meta = {{"seed", traj.metadata.seed},
                         {"burn_in", traj.metadata.burn_in},
                         {"graph_digest", traj.metadata.graph_digest},
                         {"T", traj.length()},
                         {"node_count", traj.node_count()},
                         {"d", traj.d()},
                         {"m_bar", traj.m_bar()},
                         {"initialization", "virtual pre-history Y = zbar, then burn-in"}};
  std::ofstream mout(metadata_path(path));
  if (!mout) throw Error(ErrorCode::Io, "cannot write " + metadata_path(path).string());
  mout << meta.dump(2) << '\n';
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,node,N,M", 0) != 0)
    throw Error(ErrorCode::Parse, path.string() + ": expected header t,node,N,M");

  struct Row {
    std::size_t t;
    int v;
    unsigned n, m;
  };
  std::vector<Row> rows;
  std::size_t max_t = 0;
  int max_v = -1;
  unsigned max_m = 1;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Row r{};
    if (std::sscanf(line.c_str(), "%zu,%d,%u,%u", &r.t, &r.v, &r.n, &r.m) != 4 || r.v < 0)
      throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": bad row");
    max_t = std::max(max_t, r.t);
    max_v = std::max(max_v, r.v);
    max_m = std::max(max_m, r.m);
    rows.push_back(r);
  }
  if (rows.empty()) throw Error(ErrorCode::Parse, path.string() + ": no rows");

  int node_count = max_v + 1;
  int d = 1;
  unsigned m_bar = max_m - 1;
  Trajectory::Metadata md;
  const auto mpath = metadata_path(path);
  if (std::filesystem::exists(mpath)) {
    std::ifstream min(mpath);
    nlohmann::json meta;
    try {
      min >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, mpath.string() + ": " + e.what());
    }
    node_count = meta.value("node_count", node_count);
    d = meta.value("d", d);
    m_bar = meta.value("m_bar", m_bar);
    md.seed = meta.value("seed", std::uint64_t{0});
    md.burn_in = meta.value("burn_in", std::size_t{0});
    md.graph_digest = meta.value("graph_digest", std::string{});
  }
  const std::size_t length = max_t + 1;
  if (rows.size() != length * static_cast<std::size_t>(node_count))
    throw Error(ErrorCode::Parse, path.string() + ": expected one row per (t, node)");

  Trajectory traj(node_count, d, m_bar, length);
  traj.metadata = md;
  for (const auto& r : rows) {
    if (r.v >= node_count) throw Error(ErrorCode::Parse, "node id exceeds node_count");
    traj.set(r.t, r.v, r.n, r.m);
  }
  return traj;
}

}  // namespace igl
