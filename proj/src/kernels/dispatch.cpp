#include <atomic>
#include <cstdlib>
#include <string_view>

#include "igl/kernels.hpp"

namespace igl::kernels {

namespace {

constexpr int kNoOverride = -1;
std::atomic<int> g_override{kNoOverride};

Isa detect() {
  if (const char* env = std::getenv("IGL_SIMD")) {
    const std::string_view v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

Isa detected() {
  static const Isa isa = detect();
  return isa;
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(IGL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() {
  const int o = g_override.load(std::memory_order_relaxed);
  return o == kNoOverride ? detected() : static_cast<Isa>(o);
}

void set_isa_override(std::optional<Isa> isa) {
  if (isa && !isa_available(*isa)) isa = Isa::scalar;
  g_override.store(isa ? static_cast<int>(*isa) : kNoOverride, std::memory_order_relaxed);
}

#if defined(IGL_HAVE_AVX2)
#define IGL_DISPATCH(fn, ...) \
  return active_isa() == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define IGL_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void horner_append(std::span<std::uint64_t> codes, std::span<const std::uint16_t> digits,
                   std::uint32_t radix) {
  IGL_DISPATCH(horner_append, codes, digits, radix);
}

double dot(std::span<const double> a, std::span<const double> b) { IGL_DISPATCH(dot, a, b); }

double gather_dot(std::span<const double> values, std::span<const std::uint32_t> index,
                  std::span<const double> x) {
  IGL_DISPATCH(gather_dot, values, index, x);
}

#undef IGL_DISPATCH

}  // namespace igl::kernels
