#include "igl/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "igl/error.hpp"
#include "igl/kernels.hpp"

namespace igl {

SymbolTrajectory::SymbolTrajectory(const Trajectory& traj)
    : alphabet_(traj.m_bar()),
      node_count_(traj.node_count()),
      d_(traj.d()),
      length_(traj.length()),
      symbols_(static_cast<std::size_t>(traj.node_count()) * traj.length()) {
  for (int v = 0; v < node_count_; ++v) {
    const auto ns = traj.n_series(v);
    const auto ms = traj.m_series(v);
    std::uint16_t* out = symbols_.data() + static_cast<std::size_t>(v) * length_;
    for (std::size_t t = 0; t < length_; ++t) out[t] = alphabet_.symbol(ns[t], ms[t]);
  }
}

double EmpiricalDistribution::probability(const HistoryKey& key) const {
  const auto it = counts.find(key);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

namespace {

void check_query(int node_count, std::size_t length, int d, int v, std::span<const int> cond) {
  if (length < static_cast<std::size_t>(d) + 1) {
    throw Error(ErrorCode::TooShort, "need T >= d+1 (T=" + std::to_string(length) +
                                         ", d=" + std::to_string(d) + ")");
  }
  if (v < 0 || v >= node_count) throw Error(ErrorCode::InvalidArgument, "node out of range");
  for (int q : cond) {
    if (q < 0 || q >= node_count) throw Error(ErrorCode::InvalidArgument, "node out of range");
    if (q == v) throw Error(ErrorCode::InvalidArgument, "conditioning set contains v");
  }
}

}  // namespace

WindowDistributions build_windows(const SymbolTrajectory& traj, int v, std::span<const int> cond,
                                  std::optional<int> extra) {
  std::vector<int> nodes(cond.begin(), cond.end());
  std::sort(nodes.begin(), nodes.end());
  if (extra) nodes.push_back(*extra);
  check_query(traj.node_count(), traj.length(), traj.d(), v, nodes);
  nodes.insert(nodes.begin(), v);

  const int d = traj.d();
  WindowDistributions out;
  HistoryKey key;
  key.history.resize(nodes.size() * static_cast<std::size_t>(d));
  const std::size_t last = traj.length() - 2;
  for (std::size_t t = static_cast<std::size_t>(d) - 1; t <= last; ++t) {
    std::size_t k = 0;
    for (int node : nodes) {
      const auto s = traj.series(node);
      for (int r = 0; r < d; ++r) key.history[k++] = s[t - r];
    }
    key.next = traj.series(v)[t + 1];
    ++out.joint.counts[key];
    ++out.joint.total;
  }
  // Marginal by dropping the next-step coordinate of the joint counts.
  for (const auto& [k, c] : out.joint.counts) {
    out.marginal.counts[HistoryKey{std::nullopt, k.history}] += c;
    out.marginal.total += c;
  }
  return out;
}

double entropy(const EmpiricalDistribution& dist) {
  if (dist.total == 0) return 0.0;
  const double total = static_cast<double>(dist.total);
  double h = 0.0;
  for (const auto& [k, c] : dist.counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

double directed_conditional_entropy(const WindowDistributions& w) {
  return entropy(w.joint) - entropy(w.marginal);
}

void write_distribution_csv(const std::filesystem::path& path, const EmpiricalDistribution& dist,
                            const Alphabet& alphabet) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "key,count\n";
  for (const auto& [k, c] : dist.counts) {
    std::string s;
    if (k.next) s += to_string(alphabet.values()[*k.next]) + "|";
    for (std::size_t i = 0; i < k.history.size(); ++i) {
      if (i) s += ' ';
      s += to_string(alphabet.values()[k.history[i]]);
    }
    out << s << ',' << c << '\n';
  }
}

// ---------------------------------------------------------------------------
// Packed-code estimator

namespace {

struct Scratch {
  std::vector<std::uint64_t> codes;
  std::vector<std::uint64_t> tmp;
  std::vector<std::uint32_t> hist;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

// LSD radix sort over the low `bits` bits, 11 bits per pass.
void radix_sort(std::vector<std::uint64_t>& a, std::vector<std::uint64_t>& tmp, unsigned bits) {
  constexpr unsigned kDigit = 11;
  constexpr std::size_t kBuckets = std::size_t{1} << kDigit;
  tmp.resize(a.size());
  std::vector<std::size_t> count(kBuckets);
  for (unsigned shift = 0; shift < bits; shift += kDigit) {
    std::fill(count.begin(), count.end(), 0);
    for (auto x : a) ++count[(x >> shift) & (kBuckets - 1)];
    std::size_t sum = 0;
    for (auto& c : count) {
      const std::size_t cur = c;
      c = sum;
      sum += cur;
    }
    for (auto x : a) tmp[count[(x >> shift) & (kBuckets - 1)]++] = x;
    a.swap(tmp);
  }
}

unsigned bit_width(std::uint64_t x) {
  unsigned b = 0;
  while (x) {
    ++b;
    x >>= 1;
  }
  return b;
}

// Replaces codes by their rank among distinct codes; returns the number of
// distinct values.
std::uint64_t compress(std::vector<std::uint64_t>& codes, std::vector<std::uint64_t>& tmp) {
  std::vector<std::uint64_t> uniq(codes);
  radix_sort(uniq, tmp, 64);
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  for (auto& c : codes) c = static_cast<std::uint64_t>(std::lower_bound(uniq.begin(), uniq.end(), c) - uniq.begin());
  return uniq.size();
}

}  // namespace

EmpiricalEntropySource::EmpiricalEntropySource(const Trajectory& traj)
    : EmpiricalEntropySource(SymbolTrajectory(traj)) {}

EmpiricalEntropySource::EmpiricalEntropySource(SymbolTrajectory symbols)
    : symbols_(std::move(symbols)) {
  const std::size_t n = symbols_.window_count();
  log_table_.resize(n + 1, 0.0);
  for (std::size_t c = 1; c <= n; ++c) log_table_[c] = std::log(static_cast<double>(c));
}

double EmpiricalEntropySource::conditional_entropy(int v, std::span<const int> cond) const {
  const int d = symbols_.d();
  check_query(symbols_.node_count(), symbols_.length(), d, v, cond);
  const std::size_t n = symbols_.window_count();
  const std::uint64_t radix = symbols_.alphabet().size();
  const std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();

  Scratch& s = scratch();
  s.codes.assign(n, 0);
  std::uint64_t space = 1;  // exclusive bound on current codes
  auto append = [&](int node, std::size_t start) {
    if (space > kMax / radix) space = compress(s.codes, s.tmp);
    kernels::horner_append(s.codes, symbols_.series(node).subspan(start, n),
                           static_cast<std::uint32_t>(radix));
    space *= radix;
  };
  // Window t covers lags t-r for r = 0..d-1 with t = d-1 .. T-2.
  for (int r = 0; r < d; ++r) append(v, static_cast<std::size_t>(d - 1 - r));
  for (int q : cond)
    for (int r = 0; r < d; ++r) append(q, static_cast<std::size_t>(d - 1 - r));
  // Next symbol last, so code / radix is the conditioning key.
  append(v, static_cast<std::size_t>(d));

  const double* lg = log_table_.data();
  double acc = 0.0;
  const std::uint64_t dense_limit = std::min<std::uint64_t>(std::max<std::uint64_t>(1u << 16, 2 * n), 1u << 25);
  if (space <= dense_limit) {
    s.hist.assign(space, 0);
    for (auto c : s.codes) ++s.hist[c];
    const std::uint32_t* h = s.hist.data();
    for (std::uint64_t g = 0; g < space; g += radix) {
      std::uint64_t cm = 0;
      for (std::uint64_t j = 0; j < radix; ++j) cm += h[g + j];
      if (cm == 0) continue;
      const double lcm = lg[cm];
      for (std::uint64_t j = 0; j < radix; ++j)
        if (h[g + j]) acc += h[g + j] * (lcm - lg[h[g + j]]);
    }
  } else {
    radix_sort(s.codes, s.tmp, bit_width(space - 1));
    const auto& c = s.codes;
    std::size_t i = 0;
    while (i < n) {
      const std::uint64_t group = c[i] / radix;
      std::size_t j = i;
      while (j < n && c[j] / radix == group) ++j;
      const double lcm = lg[j - i];
      std::size_t a = i;
      while (a < j) {
        std::size_t b = a;
        while (b < j && c[b] == c[a]) ++b;
        acc += static_cast<double>(b - a) * (lcm - lg[b - a]);
        a = b;
      }
      i = j;
    }
  }
  return acc / static_cast<double>(n);
}

double MemoizedEntropySource::conditional_entropy(int v, std::span<const int> cond) const {
  std::vector<int> key(cond.begin(), cond.end());
  std::sort(key.begin(), key.end());
  {
    std::lock_guard lock(mu_);
    const auto it = cache_.find({v, key});
    if (it != cache_.end()) return it->second;
  }
  const double h = inner_.conditional_entropy(v, key);
  std::lock_guard lock(mu_);
  cache_.emplace(std::make_pair(v, std::move(key)), h);
  return h;
}

std::size_t MemoizedEntropySource::cache_size() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

}  // namespace igl
