#include "igl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Dense>

#include "igl/bounds.hpp"
#include "igl/error.hpp"
#include "igl/kernels.hpp"
#include "igl/rng.hpp"

namespace igl {

std::vector<double> truncated_poisson_mass(double mu, unsigned m_bar) {
  std::vector<double> mass(m_bar + 1, 0.0);
  double pmf = std::exp(-mu);
  double cdf = 0.0;
  for (unsigned k = 0; k < m_bar; ++k) {
    mass[k] = pmf;
    cdf += pmf;
    pmf *= mu / static_cast<double>(k + 1);
  }
  mass[m_bar] = std::max(0.0, 1.0 - cdf);
  return mass;
}

namespace {

double binomial_pmf(unsigned m, unsigned n, double x) {
  double c = 1.0;
  for (unsigned i = 1; i <= n; ++i) c = c * static_cast<double>(m - n + i) / static_cast<double>(i);
  return c * std::pow(x, n) * std::pow(1.0 - x, m - n);
}

void check_node(const ExactChain& chain, int v, std::span<const int> cond) {
  const int n = chain.node_count();
  if (v < 0 || v >= n) throw Error(ErrorCode::InvalidArgument, "node out of range");
  for (int q : cond) {
    if (q < 0 || q >= n) throw Error(ErrorCode::InvalidArgument, "node out of range");
    if (q == v) throw Error(ErrorCode::InvalidArgument, "conditioning set contains v");
  }
}

const std::vector<double>& require_pi(const ExactChain& chain) {
  if (!chain.has_pi()) throw Error(ErrorCode::InvalidArgument, "stationary distribution not computed");
  return chain.pi();
}

Eigen::MatrixXd dense_matrix(const ExactChain& chain) {
  const auto s = static_cast<Eigen::Index>(chain.state_count());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto cols = chain.row_columns(i);
    const auto vals = chain.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) p(i, cols[k]) += vals[k];
  }
  return p;
}

}  // namespace

std::uint16_t ExactChain::digit(std::size_t state, int v, int lag) const {
  return static_cast<std::uint16_t>((state / stride_[static_cast<std::size_t>(v) * d() + lag]) % chi_);
}

std::vector<std::uint16_t> ExactChain::digits(std::size_t state) const {
  std::vector<std::uint16_t> out(stride_.size());
  for (auto& x : out) {
    x = static_cast<std::uint16_t>(state % chi_);
    state /= chi_;
  }
  return out;
}

double ExactChain::transition(std::size_t from, std::size_t to) const {
  for (auto k = row_ptr_[from]; k < row_ptr_[from + 1]; ++k)
    if (col_[k] == to) return val_[k];
  return 0.0;
}

std::vector<double> ExactChain::row_sums() const {
  std::vector<double> sums(state_count_, 0.0);
  for (std::size_t s = 0; s < state_count_; ++s)
    for (auto k = row_ptr_[s]; k < row_ptr_[s + 1]; ++k) sums[s] += val_[k];
  return sums;
}

void ExactChain::left_multiply(std::span<const double> x, std::span<double> out) const {
  for (std::size_t j = 0; j < state_count_; ++j) {
    const auto b = t_row_ptr_[j], e = t_row_ptr_[j + 1];
    out[j] = kernels::gather_dot({t_val_.data() + b, e - b}, {t_col_.data() + b, e - b}, x);
  }
}

ExactChain build_exact_chain(const ModelSpec& spec) {
  validate(spec);
  ExactChain c;
  c.spec_ = spec;
  const auto& g = c.spec_.graph;
  const unsigned m_bar = c.spec_.obs.m_bar;
  c.alphabet_ = Alphabet(m_bar);
  c.chi_ = c.alphabet_.size();
  const int n = g.node_count, d = g.d;

  std::size_t states = 1, per_row = 1;
  bool overflow = false;
  for (int i = 0; i < n * d && !overflow; ++i) {
    c.stride_.push_back(states);
    overflow = __builtin_mul_overflow(states, c.chi_, &states) || states > kMaxOracleStates;
  }
  for (int i = 0; i < n && !overflow; ++i) overflow = __builtin_mul_overflow(per_row, c.chi_, &per_row);
  if (overflow || states > kMaxOracleStates)
    throw Error(ErrorCode::StateSpaceTooLarge,
                "state space |chi|^(d|V|) exceeds " + std::to_string(kMaxOracleStates));
  std::size_t transitions = 0;
  if (__builtin_mul_overflow(states, per_row, &transitions) || transitions > kMaxOracleTransitions)
    throw Error(ErrorCode::StateSpaceTooLarge,
                std::to_string(states) + " states with " + std::to_string(per_row) +
                    " successors each exceed the transition budget");
  c.state_count_ = states;

  // Per-node kernels.
  struct Term {
    int source, lag;
    double weight;
  };
  c.kernel_.assign(n, std::vector<double>(states * c.chi_, 0.0));
  for (int v = 0; v < n; ++v) {
    const auto& p = g.nodes[v];
    std::vector<Term> terms;
    for (const auto& e : g.in_edges[v])
      for (int r = 0; r < d; ++r)
        if (e.weights[r] > 0.0) terms.push_back({e.from, r, p.alpha * e.weights[r]});
    const double scale = (1.0 - p.alpha) * (1.0 - g.beta);
    const double base = (1.0 - p.alpha) * g.beta * p.bias;
    const auto& rate = c.spec_.obs.rate(v);
    for (std::size_t s = 0; s < states; ++s) {
      double drive = 0.0;
      for (const auto& t : terms) drive += t.weight * c.alphabet_.value(c.digit(s, t.source, t.lag));
      double* k = c.kernel_[v].data() + s * c.chi_;
      for (std::size_t zi = 0; zi < p.noise.support.size(); ++zi) {
        const double pz = p.noise.probs[zi];
        if (pz == 0.0) continue;
        const double x = std::clamp(scale * p.noise.support[zi] + base + drive, 0.0, 1.0);
        const auto mass = truncated_poisson_mass(m_bar == 0 ? 0.0 : rate(x), m_bar);
        for (unsigned m = 1; m <= m_bar + 1; ++m) {
          const double pm = mass[m - 1];
          if (pm == 0.0) continue;
          for (unsigned nn = 0; nn <= m; ++nn) k[c.alphabet_.symbol(nn, m)] += pz * pm * binomial_pmf(m, nn, x);
        }
      }
    }
  }

  // Transitions: the new symbols enter at lag 0, older lags shift by one.
  c.row_ptr_.assign(states + 1, 0);
  c.col_.reserve(transitions);
  c.val_.reserve(transitions);
  std::vector<int> y(n);
  for (std::size_t s = 0; s < states; ++s) {
    std::size_t shifted = 0;
    for (int v = 0; v < n; ++v)
      for (int r = 1; r < d; ++r) shifted += c.digit(s, v, r - 1) * c.stride_[v * d + r];
    // Odometer over the product of node kernels.
    std::fill(y.begin(), y.end(), 0);
    for (;;) {
      double prob = 1.0;
      std::size_t to = shifted;
      for (int v = 0; v < n && prob != 0.0; ++v) {
        prob *= c.kernel_[v][s * c.chi_ + y[v]];
        to += y[v] * c.stride_[v * d];
      }
      if (prob != 0.0) {
        c.col_.push_back(static_cast<std::uint32_t>(to));
        c.val_.push_back(prob);
      }
      int v = 0;
      while (v < n && ++y[v] == static_cast<int>(c.chi_)) y[v++] = 0;
      if (v == n) break;
    }
    c.row_ptr_[s + 1] = c.col_.size();
  }

  // Transpose.
  c.t_row_ptr_.assign(states + 1, 0);
  for (auto j : c.col_) ++c.t_row_ptr_[j + 1];
  std::partial_sum(c.t_row_ptr_.begin(), c.t_row_ptr_.end(), c.t_row_ptr_.begin());
  c.t_col_.resize(c.col_.size());
  c.t_val_.resize(c.val_.size());
  std::vector<std::uint64_t> fill(c.t_row_ptr_.begin(), c.t_row_ptr_.end() - 1);
  for (std::size_t s = 0; s < states; ++s)
    for (auto k = c.row_ptr_[s]; k < c.row_ptr_[s + 1]; ++k) {
      const auto pos = fill[c.col_[k]]++;
      c.t_col_[pos] = static_cast<std::uint32_t>(s);
      c.t_val_[pos] = c.val_[k];
    }
  return c;
}

const std::vector<double>& stationary(ExactChain& chain) {
  if (chain.has_pi()) return chain.pi_;
  if (!interior_dynamics(chain.spec().graph))
    throw Error(ErrorCode::NotIrreducible,
                "some noise outcome drives X to the boundary; stationary law may not be unique");
  const std::size_t s = chain.state_count();
  std::vector<double> pi(s, 1.0 / static_cast<double>(s));
  if (s <= kMaxDenseStates) {
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    Eigen::MatrixXd a = dense_matrix(chain).transpose();
    a.diagonal().array() -= 1.0;
    a.row(static_cast<Eigen::Index>(s) - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s));
    b(static_cast<Eigen::Index>(s) - 1) = 1.0;
    const Eigen::VectorXd x = a.fullPivLu().solve(b);
    for (std::size_t i = 0; i < s; ++i) pi[i] = std::max(0.0, x(static_cast<Eigen::Index>(i)));
  } else {
    std::vector<double> next(s);
    constexpr std::size_t kMaxIterations = 1'000'000;
    std::size_t it = 0;
    for (;; ++it) {
      if (it == kMaxIterations)
        throw Error(ErrorCode::NoConvergence, "stationary power iteration did not converge");
      chain.left_multiply(pi, next);
      double residual = 0.0;
      for (std::size_t i = 0; i < s; ++i) residual = std::max(residual, std::abs(next[i] - pi[i]));
      pi.swap(next);
      if (residual <= 1e-13) break;
    }
  }
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (auto& p : pi) p /= total;
  chain.pi_ = std::move(pi);
  return chain.pi_;
}

double stationarity_residual(const ExactChain& chain) {
  const auto& pi = require_pi(chain);
  std::vector<double> next(pi.size());
  chain.left_multiply(pi, next);
  double r = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) r = std::max(r, std::abs(next[i] - pi[i]));
  return r;
}

std::vector<double> stationary_marginal(const ExactChain& chain, int v) {
  const auto& pi = require_pi(chain);
  std::vector<double> out(chain.chi(), 0.0);
  for (std::size_t s = 0; s < pi.size(); ++s) out[chain.digit(s, v, 0)] += pi[s];
  return out;
}

std::vector<std::complex<double>> spectrum(const ExactChain& chain) {
  if (chain.state_count() > kMaxDenseStates)
    throw Error(ErrorCode::StateSpaceTooLarge, "dense spectrum limited to " + std::to_string(kMaxDenseStates) + " states");
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(dense_matrix(chain), false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "eigen decomposition failed");
  std::vector<std::complex<double>> ev(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::stable_sort(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a) > std::abs(b); });
  return ev;
}

double second_eigenvalue(const ExactChain& chain, EigenMethod method) {
  const std::size_t s = chain.state_count();
  if (s < 2) return 0.0;
  if (method == EigenMethod::automatic)
    method = s <= kMaxDenseStates ? EigenMethod::dense : EigenMethod::subspace;
  if (method == EigenMethod::dense) return std::abs(spectrum(chain)[1]);
  if (s <= 4) throw Error(ErrorCode::InvalidArgument, "subspace iteration needs more than 4 states");

  // Block subspace iteration on row vectors with zero sum; that subspace is
  // invariant under x -> xP and carries every eigenvalue except the unit one.
  constexpr int k = 4;
  constexpr std::size_t kMaxIterations = 200000;
  Rng rng(derive_seed(0x5eed, Stream::test, s));
  std::vector<std::vector<double>> basis(k, std::vector<double>(s)), image(k, std::vector<double>(s));
  for (auto& b : basis)
    for (auto& x : b) x = rng.uniform() - 0.5;

  auto orthonormalize = [&](std::vector<std::vector<double>>& vs) {
    for (int i = 0; i < k; ++i) {
      auto& a = vs[i];
      const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(s);
      for (auto& x : a) x -= mean;
      for (int j = 0; j < i; ++j) {
        const double proj = kernels::dot(a, vs[j]);
        for (std::size_t t = 0; t < s; ++t) a[t] -= proj * vs[j][t];
      }
      const double norm = std::sqrt(kernels::dot(a, a));
      if (norm == 0.0) {
        // Collapsed direction: restart it from fresh noise.
        for (auto& x : a) x = rng.uniform() - 0.5;
        --i;
        continue;
      }
      for (auto& x : a) x /= norm;
    }
  };

  orthonormalize(basis);
  double previous = -1.0;
  int stable = 0;
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    for (int i = 0; i < k; ++i) chain.left_multiply(basis[i], image[i]);
    Eigen::MatrixXd h(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) h(i, j) = kernels::dot(basis[i], image[j]);
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(h, false);
    double estimate = 0.0;
    for (const auto& ev : solver.eigenvalues()) estimate = std::max(estimate, std::abs(ev));
    stable = std::abs(estimate - previous) <= 1e-12 ? stable + 1 : 0;
    if (stable >= 5) return estimate;
    previous = estimate;
    basis.swap(image);
    orthonormalize(basis);
  }
  throw Error(ErrorCode::NoConvergence, "subspace iteration for the second eigenvalue did not converge");
}

std::vector<double> tv_decay(const ExactChain& chain, int t_max) {
  const std::size_t s = chain.state_count();
  if (s > kMaxDenseStates)
    throw Error(ErrorCode::StateSpaceTooLarge, "TV decay limited to " + std::to_string(kMaxDenseStates) + " states");
  const auto& pi = require_pi(chain);
  std::vector<double> dist(static_cast<std::size_t>(t_max) + 1, 0.0);
  std::vector<double> x(s), next(s);
  for (std::size_t start = 0; start < s; ++start) {
    std::fill(x.begin(), x.end(), 0.0);
    x[start] = 1.0;
    for (int t = 0; t <= t_max; ++t) {
      double tv = 0.0;
      for (std::size_t i = 0; i < s; ++i) tv += std::abs(x[i] - pi[i]);
      dist[t] = std::max(dist[t], 0.5 * tv);
      chain.left_multiply(x, next);
      x.swap(next);
    }
  }
  return dist;
}

double fit_geometric_rate(std::span<const double> dist, int t_lo, int t_hi) {
  if (t_lo < 0 || t_hi <= t_lo || static_cast<std::size_t>(t_hi) >= dist.size())
    throw Error(ErrorCode::InvalidArgument, "fit window outside the decay curve");
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double n = t_hi - t_lo + 1;
  for (int t = t_lo; t <= t_hi; ++t) {
    if (!(dist[t] > 0.0)) throw Error(ErrorCode::InvalidArgument, "TV distance reached zero inside the fit window");
    const double y = std::log(dist[t]);
    st += t;
    sy += y;
    stt += static_cast<double>(t) * t;
    sty += t * y;
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  return std::exp(slope);
}

double exact_directed_conditional_entropy(const ExactChain& chain, int v, std::span<const int> cond) {
  check_node(chain, v, cond);
  const auto& pi = require_pi(chain);
  std::vector<int> nodes(cond.begin(), cond.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.insert(nodes.begin(), v);
  const int d = chain.d();
  const std::size_t chi = chain.chi();

  std::size_t keys = 1;
  for (std::size_t i = 0; i < nodes.size() * static_cast<std::size_t>(d); ++i) keys *= chi;
  std::vector<double> joint(keys * chi, 0.0);
  for (std::size_t s = 0; s < pi.size(); ++s) {
    if (pi[s] == 0.0) continue;
    std::size_t key = 0;
    for (int u : nodes)
      for (int r = 0; r < d; ++r) key = key * chi + chain.digit(s, u, r);
    const auto k = chain.kernel(v, s);
    double* row = joint.data() + key * chi;
    for (std::size_t y = 0; y < chi; ++y) row[y] += pi[s] * k[y];
  }
  double h = 0.0;
  for (std::size_t key = 0; key < keys; ++key) {
    const double* row = joint.data() + key * chi;
    double marginal = 0.0;
    for (std::size_t y = 0; y < chi; ++y) marginal += row[y];
    if (marginal <= 0.0) continue;
    for (std::size_t y = 0; y < chi; ++y)
      if (row[y] > 0.0) h += row[y] * std::log(marginal / row[y]);
  }
  return h;
}

ExactEntropySource::ExactEntropySource(const ExactChain& chain) : chain_(chain) { require_pi(chain); }

double ExactEntropySource::conditional_entropy(int v, std::span<const int> cond) const {
  return exact_directed_conditional_entropy(chain_, v, cond);
}

std::vector<std::vector<int>> brute_force_neighborhoods(const ExactChain& chain, double tolerance) {
  const int n = chain.node_count();
  std::vector<std::vector<int>> out(n);
  for (int v = 0; v < n; ++v) {
    std::vector<int> others;
    for (int u = 0; u < n; ++u)
      if (u != v) others.push_back(u);
    const double floor_h = exact_directed_conditional_entropy(chain, v, others);
    bool found = false;
    for (std::size_t size = 0; size <= others.size() && !found; ++size) {
      // Lexicographic combinations of `size` elements.
      std::vector<std::size_t> idx(size);
      std::iota(idx.begin(), idx.end(), 0);
      for (;;) {
        std::vector<int> q;
        for (auto i : idx) q.push_back(others[i]);
        if (exact_directed_conditional_entropy(chain, v, q) <= floor_h + tolerance) {
          out[v] = std::move(q);
          found = true;
          break;
        }
        std::size_t i = size;
        while (i > 0 && idx[i - 1] == others.size() - size + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
      }
    }
  }
  return out;
}

std::optional<EntropyGap> entropy_gap(const ExactChain& chain) {
  std::optional<EntropyGap> best;
  const auto& g = chain.spec().graph;
  for (int v = 0; v < chain.node_count(); ++v) {
    const auto nv = g.neighbors(v);
    if (nv.empty()) continue;
    const double full = exact_directed_conditional_entropy(chain, v, nv);
    for (int u : nv) {
      std::vector<int> rest;
      for (int w : nv)
        if (w != u) rest.push_back(w);
      const double gap = exact_directed_conditional_entropy(chain, v, rest) - full;
      if (!best || gap < best->gap) best = EntropyGap{v, u, gap};
    }
  }
  return best;
}

IndependenceCheck conditional_independence_check(const ExactChain& chain) {
  IndependenceCheck out;
  const auto& g = chain.spec().graph;
  for (int v = 0; v < chain.node_count(); ++v) {
    const auto nv = g.neighbors(v);
    const double base = exact_directed_conditional_entropy(chain, v, nv);
    for (int u = 0; u < chain.node_count(); ++u) {
      if (u == v || std::binary_search(nv.begin(), nv.end(), u)) continue;
      auto q = nv;
      q.push_back(u);
      const double diff = std::abs(exact_directed_conditional_entropy(chain, v, q) - base);
      if (diff >= out.max_violation) out = {diff, v, u};
    }
  }
  return out;
}

SpectralBoundReport spectral_bound_report(const ExactChain& chain) {
  SpectralBoundReport r;
  const auto& spec = chain.spec();
  r.lambda_star = second_eigenvalue(chain);
  r.bound = mixing_condition(spec.obs.mu_bar(), spec.obs.lipschitz(),
                             influence_spectral_radius(spec.graph), spec.graph.d);
  r.holds = r.lambda_star <= r.bound;
  return r;
}

OracleReport analyze(ExactChain& chain, double tolerance) {
  OracleReport r;
  stationary(chain);
  r.state_count = chain.state_count();
  r.residual = stationarity_residual(chain);
  const auto& g = chain.spec().graph;
  for (int v = 0; v < chain.node_count(); ++v) {
    r.marginals.push_back(stationary_marginal(chain, v));
    r.entropy_given_self.push_back(exact_directed_conditional_entropy(chain, v, {}));
    r.entropy_given_neighbors.push_back(exact_directed_conditional_entropy(chain, v, g.neighbors(v)));
  }
  r.brute_force = brute_force_neighborhoods(chain, tolerance);
  r.gap = entropy_gap(chain);
  r.independence = conditional_independence_check(chain);
  r.spectral = spectral_bound_report(chain);
  return r;
}

nlohmann::json to_json(const OracleReport& r) {
  nlohmann::json gap;
  if (r.gap) gap = {{"node", r.gap->node}, {"neighbor", r.gap->neighbor}, {"gap", r.gap->gap}};
  return {{"state_count", r.state_count},
          {"stationarity_residual", r.residual},
          {"marginals", r.marginals},
          {"H_next_given_self", r.entropy_given_self},
          {"H_next_given_neighbors", r.entropy_given_neighbors},
          {"brute_force_parents", r.brute_force},
          {"entropy_gap", gap},
          {"independence",
           {{"max_violation", r.independence.max_violation},
            {"node", r.independence.node},
            {"other", r.independence.other}}},
          {"spectral",
           {{"lambda_star", r.spectral.lambda_star},
            {"bound", r.spectral.bound},
            {"bound_holds", r.spectral.holds}}}};
}

void write_transition_csv(const std::filesystem::path& path, const ExactChain& chain) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.precision(17);
  out << "from,to,prob\n";
  for (std::size_t s = 0; s < chain.state_count(); ++s) {
    const auto cols = chain.row_columns(s);
    const auto vals = chain.row_values(s);
    std::vector<std::size_t> order(cols.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cols[a] < cols[b]; });
    for (auto k : order) out << s << ',' << cols[k] << ',' << vals[k] << '\n';
  }
}

void write_stationary_csv(const std::filesystem::path& path, const ExactChain& chain) {
  const auto& pi = require_pi(chain);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.precision(17);
  out << "state,prob\n";
  for (std::size_t s = 0; s < pi.size(); ++s) out << s << ',' << pi[s] << '\n';
}

}  // namespace igl
