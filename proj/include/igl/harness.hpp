#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igl/learner.hpp"
#include "igl/model.hpp"

namespace igl {

struct PilotSpec {
  std::vector<std::size_t> sample_sizes;  // empty: reuse the sweep sizes
  std::size_t trials = 20;
  double target = 0.5;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string topology = "custom";
  ModelSpec model;
  std::vector<std::size_t> sample_sizes;
  std::size_t trials = 100;
  std::optional<double> epsilon;      // fixed threshold parameter
  std::vector<double> epsilon_grid;   // tuned on pilot runs when epsilon is unset
  PilotSpec pilot;
  std::optional<std::size_t> pmax_cap;
  std::size_t burn_in = 1000;
  std::uint64_t master_seed = 1;
  std::optional<double> stop_at;      // stop the sweep once this probability is reached
  std::filesystem::path output;

  void validate() const;
};

// `graph` may be a file path (relative to the config), an inline graph
// document, or {"generate": {...}, "obs": {...}}.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc,
                                             const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

// Worker count: IGL_THREADS when set, otherwise hardware concurrency.
std::size_t worker_count();

// Runs body(i) for i in [0, count) on up to `workers` threads. The first
// failure by index is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  bool cap_warning = false;
  EdgeScore score;
  double runtime_ms = 0.0;
};

// Seed of sweep trial i; the same seed is used at every T.
std::uint64_t trial_seed(const ExperimentConfig& config, std::size_t trial);

// One simulate/learn/score cycle.
TrialResult run_trial(const ExperimentConfig& config, std::size_t sample_size, std::size_t trial,
                      double epsilon);

struct TuningRow {
  std::size_t sample_size = 0;
  std::vector<double> recovery;  // one per grid entry
};

struct TuningResult {
  double epsilon = 0.0;
  std::size_t pilot_size = 0;
  double pilot_recovery = 0.0;
  std::vector<double> grid;
  std::vector<TuningRow> rows;
};

// Pilot ladder: at the smallest pilot T where some grid value reaches the
// pilot target, take the median of the best-scoring grid values.
TuningResult tune_epsilon(const ExperimentConfig& config);

struct CurvePoint {
  std::size_t sample_size = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double recovery = 0.0;
  double mean_runtime_ms = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  std::size_t cap_warnings = 0;
  std::vector<std::size_t> failed_trials;
};

struct Anomaly {
  std::size_t from_size = 0;
  std::size_t to_size = 0;
  double drop = 0.0;
  double allowed = 0.0;
};

struct RecoveryCurve {
  std::string name;
  std::string topology;
  int node_count = 0;
  int d = 1;
  unsigned m_bar = 0;
  std::uint64_t master_seed = 0;
  double epsilon = 0.0;
  std::optional<TuningResult> tuning;
  std::vector<CurvePoint> points;
  std::vector<Anomaly> anomalies;
};

RecoveryCurve run_experiment(const ExperimentConfig& config);

// Decreases larger than 3 sqrt(p(1-p)/trials) between adjacent sizes, for
// points with at least min_trials trials.
std::vector<Anomaly> find_anomalies(const std::vector<CurvePoint>& points, std::size_t min_trials = 100);

struct SampleThreshold {
  bool reached = false;
  std::size_t sample_size = 0;  // smallest swept T with recovery >= target
  std::size_t best_size = 0;
  double best_recovery = 0.0;
};

SampleThreshold find_sample_threshold(const RecoveryCurve& curve, double target);
SampleThreshold find_sample_threshold(ExperimentConfig config, double target);

// `graph,topology,V,d,m_bar,epsilon,T,trials,successes,recovery_prob,master_seed`
std::string curve_csv(const RecoveryCurve& curve);
void write_curve_csv(const std::filesystem::path& path, const RecoveryCurve& curve);
nlohmann::json diagnostics_json(const RecoveryCurve& curve);

}  // namespace igl
