#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "igl/model.hpp"
#include "igl/rng.hpp"

namespace igl {

// Observation pairs (N_v(t), M_v(t)) for t = 0..T-1, stored node-major.
class Trajectory {
 public:
  struct Metadata {
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;
    std::string graph_digest;
  };

  Trajectory() = default;
  Trajectory(int node_count, int d, unsigned m_bar, std::size_t length);

  int node_count() const { return node_count_; }
  int d() const { return d_; }
  unsigned m_bar() const { return m_bar_; }
  std::size_t length() const { return length_; }

  unsigned n(std::size_t t, int v) const { return n_[index(t, v)]; }
  unsigned m(std::size_t t, int v) const { return m_[index(t, v)]; }
  Rational y(std::size_t t, int v) const { return Rational::reduced(n(t, v), m(t, v)); }
  void set(std::size_t t, int v, unsigned n, unsigned m);

  std::span<const std::uint8_t> n_series(int v) const { return {n_.data() + v * length_, length_}; }
  std::span<const std::uint8_t> m_series(int v) const { return {m_.data() + v * length_, length_}; }

  Metadata metadata;

  friend bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.node_count_ == b.node_count_ && a.d_ == b.d_ && a.m_bar_ == b.m_bar_ &&
           a.length_ == b.length_ && a.n_ == b.n_ && a.m_ == b.m_;
  }

 private:
  std::size_t index(std::size_t t, int v) const { return static_cast<std::size_t>(v) * length_ + t; }

  int node_count_ = 0;
  int d_ = 1;
  unsigned m_bar_ = 0;
  std::size_t length_ = 0;
  std::vector<std::uint8_t> n_;
  std::vector<std::uint8_t> m_;
};

// Hidden parameters plus the last d observed fractions of every node.
struct State {
  std::vector<double> x;        // X_v of the most recent step
  std::vector<double> history;  // d rows of Y values, ring-indexed
  int head = 0;                 // ring row holding lag 0
  int d = 1;
  int node_count = 0;

  double lagged(int v, int lag) const { return history[((head + lag) % d) * node_count + v]; }
};

class Simulator {
 public:
  explicit Simulator(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }

  // Virtual pre-history: every node's d past fractions equal zbar_v.
  State initial_state() const;

  // Advances one step: for v ascending draws Z_v, M_v, N_v; writes the new
  // observation row into n_out/m_out and shifts it into the history.
  void step(State& state, Rng& rng, std::span<std::uint8_t> n_out,
            std::span<std::uint8_t> m_out) const;

  // Deterministic part of X_v(t+1) with Z_v replaced by its mean.
  double expected_x(const State& state, int v) const;

 private:
  struct Term {
    int source;
    int lag;
    double weight;
  };

  ModelSpec spec_;
  std::vector<std::vector<Term>> terms_;
  std::vector<double> drift_scale_;  // (1-alpha)(1-beta)
  std::vector<double> drift_base_;   // (1-alpha) beta l
};

// Discards burn_in steps, then records T rows. Throws TooShort if T < d.
Trajectory simulate(const ModelSpec& spec, std::size_t length, std::size_t burn_in,
                    std::uint64_t seed);

// CSV `t,node,N,M` in (t, node) order plus `<path>.meta.json`.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::filesystem::path& path);
std::filesystem::path metadata_path(const std::filesystem::path& csv);

}  // namespace igl
