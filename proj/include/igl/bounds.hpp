#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igl/model.hpp"

namespace igl {

// Row-major dense matrix, small sizes only (|V| x |V|).
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  DenseMatrix(int r, int c, std::vector<double> values);

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

// [A(r)]_{vu} = alpha_v * a^(r)_{uv}, one matrix per lag.
std::vector<DenseMatrix> influence_matrices(const InfluenceGraph& graph);

struct PerronRoot {
  double rho = 0.0;
  std::size_t iterations = 0;
};

// Perron root of a nonnegative square A: power iteration on B + I from the
// all-ones vector for every irreducible diagonal block B, each scaled to unit
// max row sum. Throws NoConvergence with the last two quotients.
PerronRoot perron_root(const DenseMatrix& a, double rel_tol = 1e-10,
                       std::size_t max_iterations = 100000);

// Characteristic-polynomial value for 1x1 and 2x2 matrices.
std::optional<double> closed_form_spectral_radius(const DenseMatrix& a);

// Perron root; exact closed form when the matrix is at most 2x2.
double spectral_radius(const DenseMatrix& a);

// rho(A~) := max_r rho(A~(r)).
double influence_spectral_radius(const InfluenceGraph& graph);

// 2 (mu_bar + L) rho^(1/d)
double mixing_condition(double mu_bar, double lipschitz, double rho, int d);

struct PmaxBound {
  double value = 0.0;    // 2 ln(m(m+1)/2 + 2) / eps + 1
  std::size_t cap = 0;   // floor(value)
};

PmaxBound pmax_bound(unsigned m_bar, double epsilon);

struct BoundReport {
  int node_count = 0;
  int d = 1;
  unsigned m_bar = 0;
  double epsilon = 0.0;
  double gamma = 0.0;

  double rho = 0.0;
  double mu_bar = 0.0;
  double lipschitz = 0.0;
  double condition_value = 0.0;
  bool applicable = false;

  PmaxBound pmax;
  std::uint64_t chi_size = 0;
  std::uint64_t xi_exponent = 0;          // 1 + d (pmax_cap + 1)
  std::optional<std::uint64_t> xi_size;   // exact when it fits in 64 bits
  double log_xi = 0.0;                    // ln |xi|
  double log_delta = 0.0;                 // ln(eps^2 / (8 |xi|))
  std::optional<double> delta;            // when representable
  std::optional<double> log_t_excess;     // ln(T_bound - d), applicable only
  std::optional<double> t_bound;          // when applicable and finite

  double log10_t_bound() const;
};

// Sample-size bound for perfect recovery with probability 1 - gamma.
BoundReport sample_complexity(const ModelSpec& spec, double epsilon, double gamma);

// Formula core, exposed for direct evaluation.
BoundReport sample_complexity(int node_count, int d, unsigned m_bar, std::uint64_t chi_size,
                              double rho, double mu_bar, double lipschitz, double epsilon,
                              double gamma);

nlohmann::json to_json(const BoundReport& report);
std::string format_table(const BoundReport& report);

}  // namespace igl
