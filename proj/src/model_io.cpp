#include <cstdio>
#include <fstream>
#include <sstream>

#include "igl/error.hpp"
#include "igl/model.hpp"

namespace igl {

using nlohmann::json;

json to_json(const ModelSpec& spec) {
  const auto& g = spec.graph;
  json doc;
  doc["node_count"] = g.node_count;
  doc["d"] = g.d;
  doc["beta"] = g.beta;
  json nodes = json::array();
  for (int v = 0; v < g.node_count; ++v) {
    const auto& p = g.nodes[v];
    nodes.push_back({{"id", v},
                     {"alpha", p.alpha},
                     {"bias", p.bias},
                     {"zbar", p.zbar()},
                     {"noise", {{"support", p.noise.support}, {"probs", p.noise.probs}}}});
  }
  doc["nodes"] = std::move(nodes);
  json edges = json::array();
  for (int v = 0; v < g.node_count; ++v)
    for (const auto& e : g.in_edges[v])
      edges.push_back({{"from", e.from}, {"to", v}, {"weights", e.weights}});
  doc["edges"] = std::move(edges);
  json obs = {{"m_bar", spec.obs.m_bar}, {"mu_c0", spec.obs.mu.c0}, {"mu_c1", spec.obs.mu.c1}};
  if (!spec.obs.per_node.empty()) {
    json per = json::array();
    for (const auto& r : spec.obs.per_node) per.push_back({{"mu_c0", r.c0}, {"mu_c1", r.c1}});
    obs["per_node"] = std::move(per);
  }
  doc["obs"] = std::move(obs);
  return doc;
}

namespace {

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

ModelSpec model_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "graph document must be an object");
  ModelSpec spec;
  auto& g = spec.graph;
  g.node_count = require<int>(doc, "node_count");
  g.d = require<int>(doc, "d");
  g.beta = require<double>(doc, "beta");
  if (g.node_count < 1) throw Error(ErrorCode::ParamOutOfRange, "node_count must be >= 1");
  g.nodes.assign(g.node_count, NodeParams{});
  g.in_edges.assign(g.node_count, {});

  std::vector<bool> seen(g.node_count, false);
  for (const auto& n : require<json>(doc, "nodes")) {
    const int id = require<int>(n, "id");
    if (id < 0 || id >= g.node_count || seen[id])
      throw Error(ErrorCode::Parse, "node ids must be a permutation of 0..node_count-1");
    seen[id] = true;
    auto& p = g.nodes[id];
    p.alpha = require<double>(n, "alpha");
    p.bias = require<double>(n, "bias");
    if (n.contains("noise")) {
      p.noise.support = require<std::vector<double>>(n["noise"], "support");
      p.noise.probs = require<std::vector<double>>(n["noise"], "probs");
    }
    if (n.contains("zbar") && !p.noise.support.empty() &&
        p.noise.support.size() == p.noise.probs.size()) {
      const double zbar = n["zbar"].get<double>();
      if (std::abs(zbar - p.noise.mean()) > 1e-9)
        throw Error(ErrorCode::ParamOutOfRange,
                    "node " + std::to_string(id) + ": zbar does not match the noise mean");
    }
  }
  for (int v = 0; v < g.node_count; ++v)
    if (!seen[v]) throw Error(ErrorCode::Parse, "missing node " + std::to_string(v));

  for (const auto& e : require<json>(doc, "edges")) {
    const int to = require<int>(e, "to");
    if (to < 0 || to >= g.node_count) throw Error(ErrorCode::Parse, "edge target out of range");
    g.in_edges[to].push_back({require<int>(e, "from"), require<std::vector<double>>(e, "weights")});
  }
  for (auto& edges : g.in_edges)
    std::sort(edges.begin(), edges.end(),
              [](const InEdge& a, const InEdge& b) { return a.from < b.from; });

  if (doc.contains("obs")) {
    const auto& o = doc["obs"];
    spec.obs.m_bar = require<unsigned>(o, "m_bar");
    spec.obs.mu.c0 = o.value("mu_c0", 0.0);
    spec.obs.mu.c1 = o.value("mu_c1", 0.0);
    if (o.contains("per_node")) {
      for (const auto& r : o["per_node"])
        spec.obs.per_node.push_back({require<double>(r, "mu_c0"), require<double>(r, "mu_c1")});
    }
  }
  return spec;
}

ModelSpec read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

void write_model_file(const std::filesystem::path& path, const ModelSpec& spec) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << to_json(spec).dump(2) << '\n';
}

std::string digest(const ModelSpec& spec) {
  const std::string canonical = to_json(spec).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace igl
