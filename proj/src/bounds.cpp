#include "igl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>

#include "igl/error.hpp"
#include "igl/kernels.hpp"

namespace igl {

DenseMatrix::DenseMatrix(int r, int c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != static_cast<std::size_t>(r) * c)
    throw Error(ErrorCode::InvalidArgument, "matrix data size mismatch");
}

std::vector<DenseMatrix> influence_matrices(const InfluenceGraph& g) {
  std::vector<DenseMatrix> out(g.d, DenseMatrix(g.node_count, g.node_count));
  for (int v = 0; v < g.node_count; ++v)
    for (const auto& e : g.in_edges[v])
      for (int r = 0; r < g.d; ++r) out[r](v, e.from) = g.nodes[v].alpha * e.weights[r];
  return out;
}

namespace {

// Power iteration on B + I for an irreducible block B scaled to unit max
// row sum. Returns rho(B) and the iteration count.
PerronRoot shifted_power_iteration(const DenseMatrix& b, double rel_tol, std::size_t max_iterations) {
  const int n = b.rows;
  std::vector<double> x(n, 1.0 / n), y(n);
  double q_prev = std::numeric_limits<double>::quiet_NaN();
  double diff_prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::span<const double> row(b.data.data() + static_cast<std::size_t>(i) * n, n);
      y[i] = kernels::dot(row, x) + x[i];
      sum += y[i];
    }
    for (int i = 0; i < n; ++i) x[i] = y[i] / sum;
    const double q = sum;  // quotient for B + I, since sum(x) == 1
    if (it > 1) {
      const double diff = std::abs(q - q_prev);
      const double rho = std::max(q - 1.0, 0.0);
      const double scale = std::max(rho, std::numeric_limits<double>::min());
      double tail = diff;
      if (diff_prev > 0.0) {
        const double ratio = diff / diff_prev;
        tail = ratio < 1.0 ? diff * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
      }
      if (diff == 0.0 || (diff <= rel_tol * scale && tail <= rel_tol * scale)) return {rho, it};
      diff_prev = diff;
    }
    q_prev = q;
  }
  std::ostringstream os;
  os << std::setprecision(17) << "power iteration did not converge; last quotients "
     << q_prev - 1.0 << " and " << (q_prev - 1.0 + (std::isnan(diff_prev) ? 0.0 : diff_prev));
  throw Error(ErrorCode::NoConvergence, os.str());
}

// Strongly connected components of the pattern a(i, j) > 0 (Tarjan).
std::vector<std::vector<int>> components(const DenseMatrix& a) {
  const int n = a.rows;
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::vector<int>> out;
  int counter = 0;
  // Iterative DFS: frames of (node, next column to scan).
  std::vector<std::pair<int, int>> frames;
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, j] = frames.back();
      if (j < n) {
        const int w = j++;
        if (!(a(v, w) > 0.0)) continue;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const int done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<int> comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

}  // namespace

PerronRoot perron_root(const DenseMatrix& a, double rel_tol, std::size_t max_iterations) {
  if (a.rows != a.cols) throw Error(ErrorCode::InvalidArgument, "matrix must be square");
  PerronRoot out;
  // rho(A) is the largest Perron root over the irreducible diagonal blocks.
  for (const auto& comp : components(a)) {
    const int m = static_cast<int>(comp.size());
    if (m == 1) {
      out.rho = std::max(out.rho, a(comp[0], comp[0]));
      continue;
    }
    DenseMatrix block(m, m);
    double scale = 0.0;
    for (int i = 0; i < m; ++i) {
      double row = 0.0;
      for (int j = 0; j < m; ++j) row += block(i, j) = a(comp[i], comp[j]);
      scale = std::max(scale, row);
    }
    for (auto& v : block.data) v /= scale;
    const auto r = shifted_power_iteration(block, rel_tol, max_iterations);
    out.rho = std::max(out.rho, r.rho * scale);
    out.iterations += r.iterations;
  }
  return out;
}

std::optional<double> closed_form_spectral_radius(const DenseMatrix& a) {
  if (a.rows != a.cols) return std::nullopt;
  if (a.rows == 1) return std::abs(a(0, 0));
  if (a.rows != 2) return std::nullopt;
  const double tr = a(0, 0) + a(1, 1);
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const double disc = tr * tr / 4.0 - det;
  if (disc < 0.0) return std::sqrt(std::abs(det));  // complex pair, |lambda|^2 = det
  const double s = std::sqrt(disc);
  return std::max(std::abs(tr / 2.0 + s), std::abs(tr / 2.0 - s));
}

double spectral_radius(const DenseMatrix& a) {
  if (auto exact = closed_form_spectral_radius(a)) return *exact;
  return perron_root(a).rho;
}

double influence_spectral_radius(const InfluenceGraph& g) {
  double rho = 0.0;
  for (const auto& m : influence_matrices(g)) rho = std::max(rho, spectral_radius(m));
  return rho;
}

double mixing_condition(double mu_bar, double lipschitz, double rho, int d) {
  return 2.0 * (mu_bar + lipschitz) * std::pow(rho, 1.0 / d);
}

PmaxBound pmax_bound(unsigned m_bar, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::ParamOutOfRange, "epsilon must be positive");
  PmaxBound b;
  b.value = 2.0 * std::log(static_cast<double>(Alphabet::size_bound(m_bar))) / epsilon + 1.0;
  const double capped = std::min(std::floor(b.value), 1e12);
  b.cap = static_cast<std::size_t>(capped);
  return b;
}

double BoundReport::log10_t_bound() const {
  if (!log_t_excess) return std::numeric_limits<double>::quiet_NaN();
  // log10(d + e^L)
  const double l = *log_t_excess;
  const double big = std::max(l, std::log(static_cast<double>(d)));
  return (big + std::log1p(std::exp(std::min(l, std::log(double(d))) - big))) / std::log(10.0);
}

BoundReport sample_complexity(int node_count, int d, unsigned m_bar, std::uint64_t chi_size,
                              double rho, double mu_bar, double lipschitz, double epsilon,
                              double gamma) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::ParamOutOfRange, "epsilon must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::ParamOutOfRange, "gamma must lie in (0,1)");
  BoundReport r;
  r.node_count = node_count;
  r.d = d;
  r.m_bar = m_bar;
  r.epsilon = epsilon;
  r.gamma = gamma;
  r.rho = rho;
  r.mu_bar = mu_bar;
  r.lipschitz = lipschitz;
  r.condition_value = mixing_condition(mu_bar, lipschitz, rho, d);
  r.applicable = r.condition_value < 1.0;
  r.pmax = pmax_bound(m_bar, epsilon);
  r.chi_size = chi_size;
  r.xi_exponent = 1 + static_cast<std::uint64_t>(d) * (r.pmax.cap + 1);

  std::uint64_t xi = 1;
  bool fits = true;
  for (std::uint64_t i = 0; i < r.xi_exponent && fits; ++i) fits = !__builtin_mul_overflow(xi, chi_size, &xi);
  if (fits) r.xi_size = xi;
  r.log_xi = static_cast<double>(r.xi_exponent) * std::log(static_cast<double>(chi_size));

  r.log_delta = 2.0 * std::log(epsilon) - std::log(8.0) - r.log_xi;
  if (r.xi_size) {
    r.delta = epsilon * epsilon / (8.0 * static_cast<double>(*r.xi_size));
  } else if (r.log_delta > std::log(std::numeric_limits<double>::min())) {
    r.delta = std::exp(r.log_delta);
  }

  if (r.applicable) {
    const double pcap = static_cast<double>(r.pmax.cap);
    const double lead = std::log(static_cast<double>(node_count)) * (pcap + 1.0) + std::log(2.0) +
                        r.log_xi - std::log(gamma);
    r.log_t_excess = std::log(lead) + 2.0 * r.log_xi - std::log1p(-r.condition_value) - 2.0 * r.log_delta;
    if (*r.log_t_excess < std::log(std::numeric_limits<double>::max()))
      r.t_bound = static_cast<double>(d) + std::exp(*r.log_t_excess);
  }
  return r;
}

BoundReport sample_complexity(const ModelSpec& spec, double epsilon, double gamma) {
  validate(spec);
  const auto& g = spec.graph;
  return sample_complexity(g.node_count, g.d, spec.obs.m_bar, Alphabet(spec.obs.m_bar).size(),
                           influence_spectral_radius(g), spec.obs.mu_bar(), spec.obs.lipschitz(),
                           epsilon, gamma);
}

nlohmann::json to_json(const BoundReport& r) {
  auto opt = [](const auto& o) { return o ? nlohmann::json(*o) : nlohmann::json(); };
  return {{"node_count", r.node_count},
          {"d", r.d},
          {"m_bar", r.m_bar},
          {"epsilon", r.epsilon},
          {"gamma", r.gamma},
          {"rho", r.rho},
          {"mu_bar", r.mu_bar},
          {"L", r.lipschitz},
          {"condition_value", r.condition_value},
          {"applicable", r.applicable},
          {"pmax", r.pmax.value},
          {"pmax_cap", r.pmax.cap},
          {"chi_size", r.chi_size},
          {"xi_exponent", r.xi_exponent},
          {"xi_size", opt(r.xi_size)},
          {"log_xi", r.log_xi},
          {"delta", opt(r.delta)},
          {"log_delta", r.log_delta},
          {"T_bound", opt(r.t_bound)},
          {"log10_T_bound", r.log_t_excess ? nlohmann::json(r.log10_t_bound()) : nlohmann::json()}};
}

std::string format_table(const BoundReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  auto row = [&](const char* name, const auto& value) {
    os << std::left << std::setw(18) << name << value << '\n';
  };
  row("|V|", r.node_count);
  row("d", r.d);
  row("m_bar", r.m_bar);
  row("epsilon", r.epsilon);
  row("gamma", r.gamma);
  row("rho", r.rho);
  row("mu_bar", r.mu_bar);
  row("L", r.lipschitz);
  row("condition", r.condition_value);
  row("applicable", r.applicable ? "yes" : "no (2(mu_bar+L)rho^(1/d) >= 1)");
  row("|P|max", r.pmax.value);
  row("|P|max cap", r.pmax.cap);
  row("|chi|", r.chi_size);
  row("|xi| exponent", r.xi_exponent);
  if (r.xi_size)
    row("|xi|", *r.xi_size);
  else
    row("log10 |xi|", r.log_xi / std::log(10.0));
  if (r.delta)
    row("delta", *r.delta);
  else
    row("log10 delta", r.log_delta / std::log(10.0));
  if (r.t_bound)
    row("T bound", *r.t_bound);
  else if (r.log_t_excess)
    row("log10 T bound", r.log10_t_bound());
  else
    row("T bound", "n/a");
  return os.str();
}

}  // namespace igl
