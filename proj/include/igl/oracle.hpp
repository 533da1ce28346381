#pragma once

// Exact analysis of tiny instances. The joint d-history of all nodes is a
// finite Markov chain; this module enumerates it, so every quantity the
// learner estimates from data can be computed exactly here.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "igl/estimation.hpp"
#include "igl/model.hpp"

namespace igl {

constexpr std::size_t kMaxOracleStates = 20000;
constexpr std::size_t kMaxOracleTransitions = 60'000'000;
constexpr std::size_t kMaxDenseStates = 512;

// P(M = m) for m = 1..m_bar+1 with the Poisson tail lumped at m_bar+1.
std::vector<double> truncated_poisson_mass(double mu, unsigned m_bar);

class ExactChain {
 public:
  const ModelSpec& spec() const { return spec_; }
  const Alphabet& alphabet() const { return alphabet_; }
  int node_count() const { return spec_.graph.node_count; }
  int d() const { return spec_.graph.d; }
  std::size_t chi() const { return chi_; }
  std::size_t state_count() const { return state_count_; }
  std::size_t transition_count() const { return col_.size(); }

  // State digits: symbol of node v at lag r sits at position v*d + r
  // (little-endian mixed radix, base |chi|).
  std::uint16_t digit(std::size_t state, int v, int lag) const;
  std::vector<std::uint16_t> digits(std::size_t state) const;

  // P(Y_v(t+1) = y | state), y indexes the alphabet.
  std::span<const double> kernel(int v, std::size_t state) const {
    return {kernel_[v].data() + state * chi_, chi_};
  }
  double transition(std::size_t from, std::size_t to) const;
  // Nonzero entries of row `from`, in no particular order.
  std::span<const std::uint32_t> row_columns(std::size_t from) const {
    return {col_.data() + row_ptr_[from], row_ptr_[from + 1] - row_ptr_[from]};
  }
  std::span<const double> row_values(std::size_t from) const {
    return {val_.data() + row_ptr_[from], row_ptr_[from + 1] - row_ptr_[from]};
  }
  std::vector<double> row_sums() const;

  // x -> x P for a row vector x.
  void left_multiply(std::span<const double> x, std::span<double> out) const;

  // Stationary distribution, set by `stationary`.
  const std::vector<double>& pi() const { return pi_; }
  bool has_pi() const { return !pi_.empty(); }

  friend ExactChain build_exact_chain(const ModelSpec& spec);
  friend const std::vector<double>& stationary(ExactChain& chain);

 private:
  ModelSpec spec_;
  Alphabet alphabet_{0};
  std::size_t chi_ = 0;
  std::size_t state_count_ = 0;
  std::vector<std::size_t> stride_;                  // chi^(v*d + r)
  std::vector<std::vector<double>> kernel_;          // [v][state*chi + y]
  std::vector<std::uint64_t> row_ptr_, t_row_ptr_;   // CSR of P and of P^T
  std::vector<std::uint32_t> col_, t_col_;
  std::vector<double> val_, t_val_;
  std::vector<double> pi_;
};

// Throws StateSpaceTooLarge above kMaxOracleStates states or
// kMaxOracleTransitions stored transitions.
ExactChain build_exact_chain(const ModelSpec& spec);

// Dense solve up to kMaxDenseStates, power iteration to residual 1e-12
// beyond. Throws NotIrreducible when the dynamics can reach the boundary.
const std::vector<double>& stationary(ExactChain& chain);

// max_j |(pi P)_j - pi_j|
double stationarity_residual(const ExactChain& chain);

// Stationary law of Y_v, indexed by alphabet symbol.
std::vector<double> stationary_marginal(const ExactChain& chain, int v);

// Full spectrum sorted by decreasing modulus; S <= kMaxDenseStates.
std::vector<std::complex<double>> spectrum(const ExactChain& chain);

enum class EigenMethod { automatic, dense, subspace };

// |lambda*|: dense spectrum for small S, block subspace iteration on the
// sum-zero complement otherwise.
double second_eigenvalue(const ExactChain& chain, EigenMethod method = EigenMethod::automatic);

// dist(t) = max_s TV(e_s P^t, pi) for t = 0..t_max; S <= kMaxDenseStates.
std::vector<double> tv_decay(const ExactChain& chain, int t_max);

// exp(slope) of a least-squares fit of ln dist(t) on t in [t_lo, t_hi].
double fit_geometric_rate(std::span<const double> dist, int t_lo, int t_hi);

// Exact stationary H(v+ | v, Q) in nats.
double exact_directed_conditional_entropy(const ExactChain& chain, int v, std::span<const int> cond);

class ExactEntropySource final : public ConditionalEntropySource {
 public:
  explicit ExactEntropySource(const ExactChain& chain);
  int node_count() const override { return chain_.node_count(); }
  double conditional_entropy(int v, std::span<const int> cond) const override;

 private:
  const ExactChain& chain_;
};

// Per node, the smallest (then lexicographically first) Q with
// H(v+|v,Q) <= H(v+|v,V\{v}) + tolerance.
std::vector<std::vector<int>> brute_force_neighborhoods(const ExactChain& chain,
                                                        double tolerance = 1e-9);

struct EntropyGap {
  int node = -1;
  int neighbor = -1;
  double gap = 0.0;  // H(v+|v,N_v\{u}) - H(v+|v,N_v)
};

// Minimum over v and u in N_v; nullopt for graphs without cross edges.
std::optional<EntropyGap> entropy_gap(const ExactChain& chain);

struct IndependenceCheck {
  double max_violation = 0.0;  // max |H(v+|v,N_v,u) - H(v+|v,N_v)| over u not in N_v
  int node = -1;
  int other = -1;
};

IndependenceCheck conditional_independence_check(const ExactChain& chain);

struct SpectralBoundReport {
  double lambda_star = 0.0;
  double bound = 0.0;  // 2 (mu_bar + L) rho^(1/d)
  bool holds = false;  // lambda_star <= bound
};

SpectralBoundReport spectral_bound_report(const ExactChain& chain);

struct OracleReport {
  std::size_t state_count = 0;
  std::vector<std::vector<double>> marginals;
  std::vector<double> entropy_given_self;       // H(v+|v)
  std::vector<double> entropy_given_neighbors;  // H(v+|v,N_v)
  std::vector<std::vector<int>> brute_force;
  std::optional<EntropyGap> gap;
  IndependenceCheck independence;
  SpectralBoundReport spectral;
  double residual = 0.0;
};

OracleReport analyze(ExactChain& chain, double tolerance = 1e-9);
nlohmann::json to_json(const OracleReport& report);

// `from,to,prob` and `state,prob` dumps.
void write_transition_csv(const std::filesystem::path& path, const ExactChain& chain);
void write_stationary_csv(const std::filesystem::path& path, const ExactChain& chain);

}  // namespace igl
