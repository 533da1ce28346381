#include "igl/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "igl/bounds.hpp"
#include "igl/dynamics.hpp"
#include "igl/error.hpp"
#include "igl/harness.hpp"
#include "igl/learner.hpp"
#include "igl/model.hpp"
#include "igl/oracle.hpp"

namespace igl {

namespace {

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f << text;
}

struct GenerateArgs {
  std::string topology = "line";
  GeneratorParams params;
  unsigned m_bar = 0;
  double mu_c0 = 0.0, mu_c1 = 0.0;
  std::string out;
};

struct SimulateArgs {
  std::string graph, out;
  std::size_t length = 0, burn_in = 1000;
  std::uint64_t seed = 1;
};

struct LearnArgs {
  std::string trajectory, out, summary, graph;
  double epsilon = 0.0;
  std::size_t pmax_cap = 0;
  bool trace = false;
};

struct OracleArgs {
  std::string graph, out, dump;
  double tolerance = 1e-9;
};

struct BoundArgs {
  std::string graph;
  double epsilon = 0.1, gamma = 0.1;
  bool json = false;
};

struct ExperimentArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<double> epsilon, threshold;
};

int generate_cmd(const GenerateArgs& a, std::ostream& out) {
  auto p = a.params;
  p.topology = parse_topology(a.topology);
  ModelSpec spec;
  spec.graph = generate(p);
  spec.obs.m_bar = a.m_bar;
  spec.obs.mu = {a.mu_c0, a.mu_c1};
  validate(spec);
  write_text(a.out, to_json(spec).dump(2) + "\n", out);
  return 0;
}

int simulate_cmd(const SimulateArgs& a, std::ostream& out) {
  const auto spec = read_model_file(a.graph);
  const auto traj = simulate(spec, a.length, a.burn_in, a.seed);
  if (a.out.empty() || a.out == "-") {
    out << "t,node,N,M\n";
    for (std::size_t t = 0; t < traj.length(); ++t)
      for (int v = 0; v < traj.node_count(); ++v)
        out << t << ',' << v << ',' << traj.n(t, v) << ',' << traj.m(t, v) << '\n';
  } else {
    write_trajectory_csv(a.out, traj);
  }
  return 0;
}

int learn_cmd(const LearnArgs& a, std::ostream& out, std::ostream& err) {
  const auto traj = read_trajectory_csv(a.trajectory);
  auto config = LearnerConfig::with_default_cap(a.epsilon, traj.m_bar());
  if (a.pmax_cap > 0) config.pmax_cap = a.pmax_cap;
  const auto est = rec_greedy(traj, config);
  auto doc = to_json(est, a.trace);
  if (!a.graph.empty()) {
    const auto spec = read_model_file(a.graph);
    const auto score = score_edges(est, spec.graph);
    doc["perfect_recovery"] = perfect_recovery(est, spec.graph);
    doc["precision"] = score.precision();
    doc["recall"] = score.recall();
  }
  if (est.cap_warning()) err << "warning: conditioning-set cap " << config.pmax_cap << " reached\n";
  write_text(a.out, doc.dump(2) + "\n", out);
  if (!a.summary.empty()) write_text(a.summary, summary_csv(est), out);
  return 0;
}

int oracle_cmd(const OracleArgs& a, std::ostream& out) {
  auto chain = build_exact_chain(read_model_file(a.graph));
  const auto report = analyze(chain, a.tolerance);
  if (!a.dump.empty()) {
    write_transition_csv(a.dump + ".P.csv", chain);
    write_stationary_csv(a.dump + ".pi.csv", chain);
  }
  write_text(a.out, to_json(report).dump(2) + "\n", out);
  return 0;
}

int bound_cmd(const BoundArgs& a, std::ostream& out) {
  const auto report = sample_complexity(read_model_file(a.graph), a.epsilon, a.gamma);
  if (a.json)
    out << to_json(report).dump(2) << '\n';
  else
    out << format_table(report);
  return 0;
}

int experiment_cmd(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
  auto config = load_experiment_config(a.config);
  if (a.seed) config.master_seed = *a.seed;
  if (a.trials) config.trials = *a.trials;
  if (a.epsilon) config.epsilon = *a.epsilon;
  if (!a.out.empty()) config.output = a.out;
  if (a.threshold) config.stop_at = *a.threshold;
  config.validate();

  const auto curve = run_experiment(config);
  if (curve.tuning)
    err << "tuned epsilon " << curve.epsilon << " at pilot T=" << curve.tuning->pilot_size << " (pilot recovery "
        << curve.tuning->pilot_recovery << ")\n";
  for (const auto& an : curve.anomalies)
    err << "anomaly: recovery dropped by " << an.drop << " between T=" << an.from_size << " and T=" << an.to_size
        << '\n';
  if (a.threshold) {
    const auto th = find_sample_threshold(curve, *a.threshold);
    if (th.reached)
      err << "threshold " << *a.threshold << " reached at T=" << th.sample_size << '\n';
    else
      err << "NotReached: best " << th.best_recovery << " at T=" << th.best_size << '\n';
  }
  if (config.output.empty()) {
    out << curve_csv(curve);
  } else {
    write_curve_csv(config.output, curve);
    std::ofstream diag(config.output.string() + ".diag.json");
    if (!diag) throw Error(ErrorCode::Io, "cannot write diagnostics next to " + config.output.string());
    diag << diagnostics_json(curve).dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Influence-graph learning for d-memory observation processes"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a generated graph file");
  g->add_option("--topology", gen.topology, "line | tree | ring | random_bounded")->capture_default_str();
  g->add_option("--nodes", gen.params.node_count)->capture_default_str();
  g->add_option("--d", gen.params.d)->capture_default_str();
  g->add_option("--alpha", gen.params.alpha)->capture_default_str();
  g->add_option("--beta", gen.params.beta)->capture_default_str();
  g->add_option("--bias", gen.params.bias)->capture_default_str();
  g->add_option("--degree-cap", gen.params.degree_cap)->capture_default_str();
  g->add_option("--seed", gen.params.seed)->capture_default_str();
  g->add_option("--m-bar", gen.m_bar)->capture_default_str();
  g->add_option("--mu-c0", gen.mu_c0)->capture_default_str();
  g->add_option("--mu-c1", gen.mu_c1)->capture_default_str();
  g->add_option("--out,-o", gen.out, "output file (default stdout)");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate a trajectory");
  s->add_option("--graph,-g", sim.graph)->required();
  s->add_option("--T,-T", sim.length, "recorded steps")->required();
  s->add_option("--burn-in", sim.burn_in)->capture_default_str();
  s->add_option("--seed", sim.seed)->capture_default_str();
  s->add_option("--out,-o", sim.out, "trajectory CSV (default stdout)");

  LearnArgs learn;
  auto* l = app.add_subcommand("learn", "Estimate parent sets from a trajectory");
  l->add_option("--trajectory,-t", learn.trajectory)->required();
  l->add_option("--epsilon,-e", learn.epsilon)->required();
  l->add_option("--pmax-cap", learn.pmax_cap, "default: the |P|max bound for epsilon");
  l->add_flag("--trace", learn.trace, "include the greedy trace");
  l->add_option("--graph,-g", learn.graph, "true graph, to score the estimate");
  l->add_option("--out,-o", learn.out);
  l->add_option("--summary", learn.summary, "CSV summary path");

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle", "Exact analysis of a small instance");
  o->add_option("--graph,-g", orc.graph)->required();
  o->add_option("--tolerance", orc.tolerance)->capture_default_str();
  o->add_option("--dump", orc.dump, "prefix for P and pi CSV dumps");
  o->add_option("--out,-o", orc.out);

  BoundArgs bnd;
  auto* b = app.add_subcommand("bound", "Evaluate the sample-complexity bound");
  b->add_option("--graph,-g", bnd.graph)->required();
  b->add_option("--epsilon,-e", bnd.epsilon)->capture_default_str();
  b->add_option("--gamma", bnd.gamma)->capture_default_str();
  b->add_flag("--json", bnd.json);

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Run a recovery-probability sweep");
  e->add_option("--config,-c", exp.config)->required();
  e->add_option("--seed", exp.seed);
  e->add_option("--trials", exp.trials);
  e->add_option("--epsilon", exp.epsilon);
  e->add_option("--out,-o", exp.out);
  e->add_option("--threshold", exp.threshold, "report the smallest T reaching this recovery");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& ex) {
    app.exit(ex, out, err);
    return 0;
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, out, err);
    return 1;
  }

  try {
    if (*g) return generate_cmd(gen, out);
    if (*s) return simulate_cmd(sim, out);
    if (*l) return learn_cmd(learn, out, err);
    if (*o) return oracle_cmd(orc, out);
    if (*b) return bound_cmd(bnd, out);
    if (*e) return experiment_cmd(exp, out, err);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return is_validation_error(ex.code()) ? 1 : 2;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  }
  return 1;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace igl
