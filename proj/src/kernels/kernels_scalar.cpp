#include "igl/kernels.hpp"

namespace igl::kernels::scalar {

void horner_append(std::span<std::uint64_t> codes, std::span<const std::uint16_t> digits,
                   std::uint32_t radix) {
  const std::size_t n = codes.size();
  for (std::size_t i = 0; i < n; ++i) codes[i] = codes[i] * radix + digits[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double gather_dot(std::span<const double> values, std::span<const std::uint32_t> index,
                  std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += values[i] * x[index[i]];
  return acc;
}

}  // namespace igl::kernels::scalar
