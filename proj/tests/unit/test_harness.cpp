#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>

#include "battery.hpp"
#include "igl/error.hpp"
#include "igl/harness.hpp"

using namespace igl;

namespace {

class ThreadEnv {
 public:
  explicit ThreadEnv(const char* n) {
    if (const char* old = std::getenv("IGL_THREADS")) saved_ = old;
    setenv("IGL_THREADS", n, 1);
  }
  ~ThreadEnv() {
    if (saved_)
      setenv("IGL_THREADS", saved_->c_str(), 1);
    else
      unsetenv("IGL_THREADS");
  }

 private:
  std::optional<std::string> saved_;
};

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.name = "unit";
  c.topology = "line";
  c.model = igl::testing::make_model(4, 1, 0, {{0, 1}, {1, 2}, {2, 3}});
  c.sample_sizes = {50, 400, 3000};
  c.trials = 12;
  c.epsilon_grid = {0.005, 0.02, 0.08};
  c.pilot = {{400}, 6, 0.5};
  c.burn_in = 200;
  c.master_seed = 31;
  return c;
}

TEST(Harness, ParallelForVisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 7, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(Harness, ParallelForPropagatesExceptions) {
  EXPECT_THROW(parallel_for(50, 4, [](std::size_t i) {
                 if (i == 17) throw Error(ErrorCode::Internal, "boom");
               }),
               Error);
}

TEST(Harness, RepeatedRunsAreByteIdentical) {
  const auto c = small_config();
  EXPECT_EQ(curve_csv(run_experiment(c)), curve_csv(run_experiment(c)));
}

TEST(Harness, SerialAndParallelAgree) {
  const auto c = small_config();
  std::string serial, parallel;
  {
    ThreadEnv env("1");
    serial = curve_csv(run_experiment(c));
  }
  {
    ThreadEnv env("5");
    parallel = curve_csv(run_experiment(c));
  }
  EXPECT_EQ(serial, parallel);
}

TEST(Harness, TrialsReproduceFromTheirSeed) {
  const auto c = small_config();
  const auto curve = run_experiment(c);
  for (const auto& p : curve.points)
    for (std::size_t i = 0; i < p.trials; ++i) {
      const bool failed = std::find(p.failed_trials.begin(), p.failed_trials.end(), i) != p.failed_trials.end();
      EXPECT_EQ(run_trial(c, p.sample_size, i, curve.epsilon).success, !failed);
    }
  EXPECT_EQ(trial_seed(c, 3), derive_seed(31, Stream::sweep, 3));
}

TEST(Harness, TuningPicksFromGrid) {
  const auto c = small_config();
  const auto tuning = tune_epsilon(c);
  EXPECT_NE(std::find(c.epsilon_grid.begin(), c.epsilon_grid.end(), tuning.epsilon), c.epsilon_grid.end());
  EXPECT_EQ(tuning.rows.size(), 1u);
  EXPECT_EQ(tuning.rows[0].recovery.size(), 3u);
  const auto curve = run_experiment(c);
  ASSERT_TRUE(curve.tuning.has_value());
  EXPECT_EQ(curve.epsilon, tuning.epsilon);

  auto fixed = c;
  fixed.epsilon = 0.02;
  const auto f = run_experiment(fixed);
  EXPECT_FALSE(f.tuning.has_value());
  EXPECT_EQ(f.epsilon, 0.02);
}

TEST(Harness, SelfLoopsOnlyRecoversWithOneTrial) {
  ExperimentConfig c;
  c.model = igl::testing::make_model(3, 1, 0, {});
  c.sample_sizes = {20000};
  c.trials = 1;
  c.epsilon = 0.1;
  const auto curve = run_experiment(c);
  ASSERT_EQ(curve.points.size(), 1u);
  EXPECT_DOUBLE_EQ(curve.points[0].recovery, 1.0);
}

TEST(Harness, ThresholdSearch) {
  auto c = small_config();
  c.epsilon = 0.02;
  const auto curve = run_experiment(c);
  const auto zero = find_sample_threshold(curve, 0.0);
  EXPECT_TRUE(zero.reached);
  EXPECT_EQ(zero.sample_size, 50u);
  const auto never = find_sample_threshold(curve, 1.01);
  EXPECT_FALSE(never.reached);
  EXPECT_GT(never.best_size, 0u);

  const auto th = find_sample_threshold(c, 0.9);
  if (th.reached) {
    const auto it = std::find_if(curve.points.begin(), curve.points.end(),
                                 [](const CurvePoint& p) { return p.recovery >= 0.9; });
    ASSERT_NE(it, curve.points.end());
    EXPECT_EQ(th.sample_size, it->sample_size);
  }
}

TEST(Harness, StopAtEndsSweepEarly) {
  auto c = small_config();
  c.epsilon = 0.02;
  c.sample_sizes = {50, 3000, 5000, 8000};
  c.stop_at = 0.5;
  const auto curve = run_experiment(c);
  ASSERT_FALSE(curve.points.empty());
  EXPECT_GE(curve.points.back().recovery, 0.5);
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) EXPECT_LT(curve.points[i].recovery, 0.5);
}

TEST(Harness, AnomalyFlagging) {
  auto point = [](std::size_t t, std::size_t successes) {
    CurvePoint p;
    p.sample_size = t;
    p.trials = 100;
    p.successes = successes;
    p.recovery = successes / 100.0;
    return p;
  };
  std::vector<CurvePoint> pts{point(100, 80),
                              point(200, 60),   // drop 0.2 > 3 * sqrt(0.8*0.2/100) = 0.12
                              point(300, 55)};  // drop 0.05 < 0.147
  const auto an = find_anomalies(pts);
  ASSERT_EQ(an.size(), 1u);
  EXPECT_EQ(an[0].from_size, 100u);
  EXPECT_NEAR(an[0].drop, 0.2, 1e-12);
  EXPECT_NEAR(an[0].allowed, 0.12, 1e-12);
  pts[1].trials = 50;
  EXPECT_TRUE(find_anomalies(pts).empty());
}

TEST(Harness, CsvSchema) {
  auto c = small_config();
  c.epsilon = 0.02;
  const auto csv = curve_csv(run_experiment(c));
  const auto header = csv.substr(0, csv.find('\n'));
  EXPECT_NE(header.find("T"), std::string::npos);
  EXPECT_NE(header.find("recovery"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Config, GeneratedGraphAndOverrides) {
  const auto doc = nlohmann::json::parse(R"({
    "name": "gen",
    "graph": {"generate": {"topology": "ring", "node_count": 5, "d": 2},
              "obs": {"m_bar": 2, "mu_c0": 0.2, "mu_c1": 0.3}},
    "T": [100, 200],
    "trials": 7,
    "epsilon": [0.01, 0.02],
    "pilot": {"T": [150], "trials": 3, "target": 0.6},
    "seed": 99,
    "stop_at": 0.9
  })");
  const auto c = experiment_config_from_json(doc);
  EXPECT_EQ(c.model.graph.node_count, 5);
  EXPECT_EQ(c.model.graph.d, 2);
  EXPECT_EQ(c.model.obs.m_bar, 2u);
  EXPECT_EQ(c.sample_sizes, (std::vector<std::size_t>{100, 200}));
  EXPECT_EQ(c.trials, 7u);
  EXPECT_FALSE(c.epsilon.has_value());
  EXPECT_EQ(c.epsilon_grid.size(), 2u);
  EXPECT_EQ(c.pilot.trials, 3u);
  EXPECT_EQ(c.master_seed, 99u);
  EXPECT_EQ(c.stop_at, 0.9);
  const auto again = experiment_config_from_json(to_json(c));
  EXPECT_EQ(to_json(again), to_json(c));
}

TEST(Config, Errors) {
  auto base = nlohmann::json::parse(R"({"graph": {"generate": {"node_count": 3}}, "T": [100], "epsilon": 0.1})");
  EXPECT_NO_THROW(experiment_config_from_json(base));
  auto bad = base;
  bad["T"] = nlohmann::json::array({1});
  try {
    experiment_config_from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooShort);
  }
  bad = base;
  bad.erase("epsilon");
  EXPECT_THROW(experiment_config_from_json(bad), Error);
  bad = base;
  bad.erase("graph");
  EXPECT_THROW(experiment_config_from_json(bad), Error);
  EXPECT_THROW(load_experiment_config("/nonexistent/config.json"), Error);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"sweep_d1_m0_line", "sweep_d1_m0_tree", "sweep_d1_m0_ring", "sweep_d1_m2_line", "sweep_d2_m2_line"}) {
    const auto path = std::filesystem::path(IGL_SOURCE_DIR) / "configs" / (std::string(name) + ".json");
    EXPECT_NO_THROW(load_experiment_config(path)) << name;
  }
}

}  // namespace
