#include "igl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "igl/dynamics.hpp"
#include "igl/error.hpp"
#include "igl/estimation.hpp"
#include "igl/rng.hpp"

namespace igl {

using nlohmann::json;

namespace {

std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("field '") + key + "': " + e.what());
  }
}

ModelSpec generated_model(const json& gen, const json& obs, std::string& topology) {
  GeneratorParams p;
  topology = get_or<std::string>(gen, "topology", "line");
  p.topology = parse_topology(topology);
  p.node_count = get_or(gen, "node_count", p.node_count);
  p.d = get_or(gen, "d", p.d);
  p.alpha = get_or(gen, "alpha", p.alpha);
  p.beta = get_or(gen, "beta", p.beta);
  p.bias = get_or(gen, "bias", p.bias);
  p.degree_cap = get_or(gen, "degree_cap", p.degree_cap);
  p.seed = get_or<std::uint64_t>(gen, "seed", p.seed);
  if (gen.contains("noise")) {
    p.noise.support = get_or<std::vector<double>>(gen["noise"], "support", {});
    p.noise.probs = get_or<std::vector<double>>(gen["noise"], "probs", {});
  }
  ModelSpec spec;
  spec.graph = generate(p);
  spec.obs.m_bar = get_or(obs, "m_bar", 0u);
  spec.obs.mu = {get_or(obs, "mu_c0", 0.0), get_or(obs, "mu_c1", 0.0)};
  return spec;
}

}  // namespace

void ExperimentConfig::validate() const {
  igl::validate(model);
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (sample_sizes.empty()) throw Error(ErrorCode::InvalidArgument, "no sample sizes to sweep");
  const std::size_t min_t = static_cast<std::size_t>(model.graph.d) + 1;
  for (auto t : sample_sizes)
    if (t < min_t) throw Error(ErrorCode::TooShort, "sample size " + std::to_string(t) + " < d+1");
  for (auto t : pilot.sample_sizes)
    if (t < min_t) throw Error(ErrorCode::TooShort, "pilot sample size " + std::to_string(t) + " < d+1");
  if (!epsilon && epsilon_grid.empty())
    throw Error(ErrorCode::InvalidArgument, "either epsilon or an epsilon grid is required");
  if (epsilon && !(*epsilon > 0.0)) throw Error(ErrorCode::ParamOutOfRange, "epsilon must be positive");
  for (double e : epsilon_grid)
    if (!(e > 0.0)) throw Error(ErrorCode::ParamOutOfRange, "epsilon grid values must be positive");
  if (!epsilon && pilot.trials < 1) throw Error(ErrorCode::InvalidArgument, "pilot trials must be >= 1");
  if (pmax_cap && *pmax_cap < 1) throw Error(ErrorCode::ParamOutOfRange, "pmax_cap must be >= 1");
}

ExperimentConfig experiment_config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "experiment config must be an object");
  ExperimentConfig c;
  c.name = get_or<std::string>(doc, "name", c.name);
  if (!doc.contains("graph")) throw Error(ErrorCode::Parse, "missing field 'graph'");
  const json& g = doc["graph"];
  if (g.is_string()) {
    auto path = std::filesystem::path(g.get<std::string>());
    if (path.is_relative()) path = base_dir / path;
    if (!std::filesystem::exists(path))
      throw Error(ErrorCode::InvalidArgument, "graph file not found: " + path.string());
    c.model = read_model_file(path);
  } else if (g.is_object() && g.contains("generate")) {
    c.model = generated_model(g["generate"], g.value("obs", json::object()), c.topology);
  } else {
    c.model = model_from_json(g);
  }
  c.topology = get_or<std::string>(doc, "topology", c.topology);

  c.sample_sizes = get_or<std::vector<std::size_t>>(doc, "T", {});
  c.trials = get_or<std::size_t>(doc, "trials", c.trials);
  if (doc.contains("epsilon")) {
    if (doc["epsilon"].is_array())
      c.epsilon_grid = get_or<std::vector<double>>(doc, "epsilon", {});
    else
      c.epsilon = get_or<double>(doc, "epsilon", 0.0);
  }
  if (doc.contains("pilot")) {
    const json& p = doc["pilot"];
    c.pilot.sample_sizes = get_or<std::vector<std::size_t>>(p, "T", {});
    c.pilot.trials = get_or<std::size_t>(p, "trials", c.pilot.trials);
    c.pilot.target = get_or<double>(p, "target", c.pilot.target);
  }
  if (doc.contains("pmax_cap")) c.pmax_cap = get_or<std::size_t>(doc, "pmax_cap", 1);
  c.burn_in = get_or<std::size_t>(doc, "burn_in", c.burn_in);
  c.master_seed = get_or<std::uint64_t>(doc, "seed", c.master_seed);
  if (doc.contains("stop_at")) c.stop_at = get_or<double>(doc, "stop_at", 1.0);
  if (doc.contains("output")) {
    auto out = std::filesystem::path(get_or<std::string>(doc, "output", ""));
    c.output = out.is_relative() ? base_dir / out : out;
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return experiment_config_from_json(doc, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json doc = {{"name", c.name},
              {"topology", c.topology},
              {"graph", to_json(c.model)},
              {"T", c.sample_sizes},
              {"trials", c.trials},
              {"burn_in", c.burn_in},
              {"seed", c.master_seed}};
  if (c.epsilon)
    doc["epsilon"] = *c.epsilon;
  else
    doc["epsilon"] = c.epsilon_grid;
  doc["pilot"] = {{"T", c.pilot.sample_sizes}, {"trials", c.pilot.trials}, {"target", c.pilot.target}};
  if (c.pmax_cap) doc["pmax_cap"] = *c.pmax_cap;
  if (c.stop_at) doc["stop_at"] = *c.stop_at;
  if (!c.output.empty()) doc["output"] = c.output.string();
  return doc;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("IGL_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        failed = true;
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t trial_seed(const ExperimentConfig& config, std::size_t trial) {
  return derive_seed(config.master_seed, Stream::sweep, trial);
}

namespace {

LearnerConfig learner_config(const ExperimentConfig& config, double epsilon) {
  auto lc = LearnerConfig::with_default_cap(epsilon, config.model.obs.m_bar);
  if (config.pmax_cap) lc.pmax_cap = *config.pmax_cap;
  return lc;
}

[[noreturn]] void rethrow_with_seed(std::size_t trial, std::uint64_t seed, std::size_t t) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), "trial " + std::to_string(trial) + " (seed " + std::to_string(seed) +
                              ", T=" + std::to_string(t) + ") failed: " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Internal, "trial " + std::to_string(trial) + " (seed " +
                                                std::to_string(seed) + ", T=" + std::to_string(t) +
                                                ") failed: " + e.what());
  }
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& config, std::size_t sample_size, std::size_t trial,
                      double epsilon) {
  TrialResult r;
  r.trial = trial;
  r.seed = trial_seed(config, trial);
  try {
    const auto start = std::chrono::steady_clock::now();
    const Trajectory traj = simulate(config.model, sample_size, config.burn_in, r.seed);
    const auto est = rec_greedy(traj, learner_config(config, epsilon));
    r.success = perfect_recovery(est, config.model.graph);
    r.cap_warning = est.cap_warning();
    r.score = score_edges(est, config.model.graph);
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  } catch (...) {
    rethrow_with_seed(trial, r.seed, sample_size);
  }
  return r;
}

TuningResult tune_epsilon(const ExperimentConfig& config) {
  if (config.epsilon_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty epsilon grid");
  TuningResult out;
  out.grid = config.epsilon_grid;
  std::sort(out.grid.begin(), out.grid.end());
  auto sizes = config.pilot.sample_sizes.empty() ? config.sample_sizes : config.pilot.sample_sizes;
  std::sort(sizes.begin(), sizes.end());
  const std::size_t g = out.grid.size();
  const std::size_t workers = worker_count();

  for (std::size_t t : sizes) {
    std::vector<std::vector<char>> hits(config.pilot.trials, std::vector<char>(g, 0));
    parallel_for(config.pilot.trials, workers, [&](std::size_t j) {
      const auto seed = derive_seed(config.master_seed, Stream::pilot, j);
      try {
        const Trajectory traj = simulate(config.model, t, config.burn_in, seed);
        const EmpiricalEntropySource raw(traj);
        const MemoizedEntropySource source(raw);
        for (std::size_t k = 0; k < g; ++k)
          hits[j][k] = perfect_recovery(rec_greedy(source, learner_config(config, out.grid[k])),
                                        config.model.graph);
      } catch (...) {
        rethrow_with_seed(j, seed, t);
      }
    });
    TuningRow row{t, std::vector<double>(g, 0.0)};
    for (std::size_t k = 0; k < g; ++k) {
      std::size_t s = 0;
      for (const auto& h : hits) s += h[k];
      row.recovery[k] = static_cast<double>(s) / static_cast<double>(config.pilot.trials);
    }
    out.rows.push_back(row);
    const double best = *std::max_element(row.recovery.begin(), row.recovery.end());
    if (best >= config.pilot.target || t == sizes.back()) {
      std::vector<std::size_t> argmax;
      for (std::size_t k = 0; k < g; ++k)
        if (row.recovery[k] == best) argmax.push_back(k);
      out.epsilon = out.grid[argmax[(argmax.size() - 1) / 2]];
      out.pilot_size = t;
      out.pilot_recovery = best;
      break;
    }
  }
  return out;
}

std::vector<Anomaly> find_anomalies(const std::vector<CurvePoint>& points, std::size_t min_trials) {
  std::vector<Anomaly> out;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const auto& a = points[i - 1];
    const auto& b = points[i];
    if (a.trials < min_trials || b.trials < min_trials) continue;
    const double allowed = 3.0 * std::sqrt(a.recovery * (1.0 - a.recovery) / static_cast<double>(a.trials));
    const double drop = a.recovery - b.recovery;
    if (drop > allowed) out.push_back({a.sample_size, b.sample_size, drop, allowed});
  }
  return out;
}

RecoveryCurve run_experiment(const ExperimentConfig& config) {
  config.validate();
  RecoveryCurve curve;
  curve.name = config.name;
  curve.topology = config.topology;
  curve.node_count = config.model.graph.node_count;
  curve.d = config.model.graph.d;
  curve.m_bar = config.model.obs.m_bar;
  curve.master_seed = config.master_seed;
  if (config.epsilon) {
    curve.epsilon = *config.epsilon;
  } else {
    curve.tuning = tune_epsilon(config);
    curve.epsilon = curve.tuning->epsilon;
  }

  auto sizes = config.sample_sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  const std::size_t workers = worker_count();
  for (std::size_t t : sizes) {
    std::vector<TrialResult> results(config.trials);
    parallel_for(config.trials, workers,
                 [&](std::size_t i) { results[i] = run_trial(config, t, i, curve.epsilon); });
    CurvePoint p;
    p.sample_size = t;
    p.trials = config.trials;
    double runtime = 0, precision = 0, recall = 0;
    for (const auto& r : results) {
      if (r.success)
        ++p.successes;
      else
        p.failed_trials.push_back(r.trial);
      p.cap_warnings += r.cap_warning;
      runtime += r.runtime_ms;
      precision += r.score.precision();
      recall += r.score.recall();
    }
    const double n = static_cast<double>(config.trials);
    p.recovery = static_cast<double>(p.successes) / n;
    p.mean_runtime_ms = runtime / n;
    p.mean_precision = precision / n;
    p.mean_recall = recall / n;
    curve.points.push_back(std::move(p));
    if (config.stop_at && curve.points.back().recovery >= *config.stop_at) break;
  }
  curve.anomalies = find_anomalies(curve.points);
  return curve;
}

SampleThreshold find_sample_threshold(const RecoveryCurve& curve, double target) {
  SampleThreshold s;
  for (const auto& p : curve.points) {
    if (p.recovery > s.best_recovery || s.best_size == 0) {
      s.best_recovery = p.recovery;
      s.best_size = p.sample_size;
    }
    if (!s.reached && p.recovery >= target) {
      s.reached = true;
      s.sample_size = p.sample_size;
    }
  }
  return s;
}

SampleThreshold find_sample_threshold(ExperimentConfig config, double target) {
  config.stop_at = target;
  return find_sample_threshold(run_experiment(config), target);
}

std::string curve_csv(const RecoveryCurve& c) {
  std::ostringstream os;
  os << "graph,topology,V,d,m_bar,epsilon,T,trials,successes,recovery_prob,master_seed\n";
  for (const auto& p : c.points) {
    os << c.name << ',' << c.topology << ',' << c.node_count << ',' << c.d << ',' << c.m_bar << ','
       << shortest(c.epsilon) << ',' << p.sample_size << ',' << p.trials << ',' << p.successes << ','
       << shortest(p.recovery) << ',' << c.master_seed << '\n';
  }
  return os.str();
}

void write_curve_csv(const std::filesystem::path& path, const RecoveryCurve& curve) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << curve_csv(curve);
}

json diagnostics_json(const RecoveryCurve& c) {
  json points = json::array();
  for (const auto& p : c.points)
    points.push_back({{"T", p.sample_size},
                      {"trials", p.trials},
                      {"successes", p.successes},
                      {"recovery_prob", p.recovery},
                      {"mean_runtime_ms", p.mean_runtime_ms},
                      {"mean_precision", p.mean_precision},
                      {"mean_recall", p.mean_recall},
                      {"cap_warnings", p.cap_warnings},
                      {"failed_trials", p.failed_trials}});
  json anomalies = json::array();
  for (const auto& a : c.anomalies)
    anomalies.push_back({{"from_T", a.from_size}, {"to_T", a.to_size}, {"drop", a.drop}, {"allowed", a.allowed}});
  json doc = {{"graph", c.name},
              {"topology", c.topology},
              {"V", c.node_count},
              {"d", c.d},
              {"m_bar", c.m_bar},
              {"master_seed", c.master_seed},
              {"epsilon", c.epsilon},
              {"initialization", "virtual pre-history Y = zbar, then burn-in"},
              {"points", std::move(points)},
              {"anomalies", std::move(anomalies)}};
  if (c.tuning) {
    json rows = json::array();
    for (const auto& r : c.tuning->rows) rows.push_back({{"T", r.sample_size}, {"recovery", r.recovery}});
    doc["tuning"] = {{"grid", c.tuning->grid},
                     {"pilot_T", c.tuning->pilot_size},
                     {"pilot_recovery", c.tuning->pilot_recovery},
                     {"rows", std::move(rows)}};
  }
  return doc;
}

}  // namespace igl
