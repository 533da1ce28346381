#pragma once

// Data-parallel inner loops used by the estimator and the exact-chain
// linear algebra. Each kernel has a scalar reference implementation and,
// on x86-64, an AVX2/FMA variant. The active variant is chosen once at
// runtime from CPUID, and can be forced with IGL_SIMD=scalar|avx2.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace igl::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);

// True when the variant is compiled in and the CPU supports it.
bool isa_available(Isa isa);

Isa active_isa();

// Forces a variant for the current process (tests use this to run both
// paths). std::nullopt restores the CPUID/env selection.
void set_isa_override(std::optional<Isa> isa);

// codes[i] = codes[i] * radix + digits[i]. Caller guarantees no overflow.
void horner_append(std::span<std::uint64_t> codes, std::span<const std::uint16_t> digits,
                   std::uint32_t radix);

double dot(std::span<const double> a, std::span<const double> b);

// sum_i values[i] * x[index[i]]
double gather_dot(std::span<const double> values, std::span<const std::uint32_t> index,
                  std::span<const double> x);

namespace scalar {
void horner_append(std::span<std::uint64_t> codes, std::span<const std::uint16_t> digits,
                   std::uint32_t radix);
double dot(std::span<const double> a, std::span<const double> b);
double gather_dot(std::span<const double> values, std::span<const std::uint32_t> index,
                  std::span<const double> x);
}  // namespace scalar

namespace avx2 {
void horner_append(std::span<std::uint64_t> codes, std::span<const std::uint16_t> digits,
                   std::uint32_t radix);
double dot(std::span<const double> a, std::span<const double> b);
double gather_dot(std::span<const double> values, std::span<const std::uint32_t> index,
                  std::span<const double> x);
}  // namespace avx2

}  // namespace igl::kernels
