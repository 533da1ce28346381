#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "igl/dynamics.hpp"
#include "igl/model.hpp"

namespace igl {

// A trajectory re-expressed as alphabet symbols, one contiguous series per node.
class SymbolTrajectory {
 public:
  explicit SymbolTrajectory(const Trajectory& traj);

  const Alphabet& alphabet() const { return alphabet_; }
  int node_count() const { return node_count_; }
  int d() const { return d_; }
  std::size_t length() const { return length_; }
  // Number of (next, d-history) windows: T - d.
  std::size_t window_count() const { return length_ > std::size_t(d_) ? length_ - d_ : 0; }
  std::span<const std::uint16_t> series(int v) const {
    return {symbols_.data() + static_cast<std::size_t>(v) * length_, length_};
  }

 private:
  Alphabet alphabet_;
  int node_count_;
  int d_;
  std::size_t length_;
  std::vector<std::uint16_t> symbols_;
};

// Optional next-step symbol, then d lags (most recent first) for v, for each
// member of Q in ascending id order, and finally for the optional extra node.
struct HistoryKey {
  std::optional<std::uint16_t> next;
  std::vector<std::uint16_t> history;

  friend auto operator<=>(const HistoryKey&, const HistoryKey&) = default;
  friend bool operator==(const HistoryKey&, const HistoryKey&) = default;
};

struct EmpiricalDistribution {
  std::map<HistoryKey, std::uint64_t> counts;
  std::uint64_t total = 0;

  double probability(const HistoryKey& key) const;
};

struct WindowDistributions {
  EmpiricalDistribution joint;     // over (y_{v+}, y^(d)_{v,Q})
  EmpiricalDistribution marginal;  // over y^(d)_{v,Q}, by dropping the next symbol
};

// Windows t = d-1 .. T-2. Throws TooShort when T < d+1, InvalidArgument when
// v is in Q or an id is out of range.
WindowDistributions build_windows(const SymbolTrajectory& traj, int v, std::span<const int> cond,
                                  std::optional<int> extra = std::nullopt);

// Plug-in entropy in nats, 0 ln 0 := 0.
double entropy(const EmpiricalDistribution& dist);

// H(v+, v, Q) - H(v, Q) from the same windows.
double directed_conditional_entropy(const WindowDistributions& windows);

void write_distribution_csv(const std::filesystem::path& path, const EmpiricalDistribution& dist,
                            const Alphabet& alphabet);

// Anything that can answer H(v+ | v, Q) queries: plug-in estimates from a
// trajectory, or exact values from the oracle chain.
class ConditionalEntropySource {
 public:
  virtual ~ConditionalEntropySource() = default;
  virtual int node_count() const = 0;
  // cond must not contain v; order does not matter.
  virtual double conditional_entropy(int v, std::span<const int> cond) const = 0;
};

// Plug-in estimator on packed window codes. Thread-safe; each thread keeps
// its own scratch buffers.
class EmpiricalEntropySource final : public ConditionalEntropySource {
 public:
  explicit EmpiricalEntropySource(const Trajectory& traj);
  explicit EmpiricalEntropySource(SymbolTrajectory symbols);

  int node_count() const override { return symbols_.node_count(); }
  double conditional_entropy(int v, std::span<const int> cond) const override;

  const SymbolTrajectory& symbols() const { return symbols_; }

 private:
  SymbolTrajectory symbols_;
  std::vector<double> log_table_;  // ln(c) for c = 0..window_count (index 0 unused)
};

// Caches answers of another source keyed by (v, sorted Q). Safe under
// concurrent queries.
class MemoizedEntropySource final : public ConditionalEntropySource {
 public:
  explicit MemoizedEntropySource(const ConditionalEntropySource& inner) : inner_(inner) {}

  int node_count() const override { return inner_.node_count(); }
  double conditional_entropy(int v, std::span<const int> cond) const override;
  std::size_t cache_size() const;

 private:
  const ConditionalEntropySource& inner_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, std::vector<int>>, double> cache_;
};

}  // namespace igl
