// Compiled with -mavx2 -mfma; only reached when CPUID reports both.

#include <immintrin.h>

#include "igl/kernels.hpp"

namespace igl::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void horner_append(std::span<std::uint64_t> codes, std::span<const std::uint16_t> digits,
                   std::uint32_t radix) {
  const std::size_t n = codes.size();
  std::uint64_t* c = codes.data();
  const std::uint16_t* dg = digits.data();
  const __m256i r = _mm256_set1_epi64x(static_cast<long long>(radix));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i code = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(c + i));
    // 64x32 multiply from two 32x32->64 halves.
    const __m256i lo = _mm256_mul_epu32(code, r);
    const __m256i hi = _mm256_mul_epu32(_mm256_srli_epi64(code, 32), r);
    const __m256i prod = _mm256_add_epi64(lo, _mm256_slli_epi64(hi, 32));
    const __m128i d16 = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(dg + i));
    const __m256i d64 = _mm256_cvtepu16_epi64(d16);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(c + i), _mm256_add_epi64(prod, d64));
  }
  for (; i < n; ++i) c[i] = c[i] * radix + dg[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += pa[i] * pb[i];
  return acc;
}

double gather_dot(std::span<const double> values, std::span<const std::uint32_t> index,
                  std::span<const double> x) {
  const std::size_t n = values.size();
  const double* pv = values.data();
  const std::uint32_t* pi = index.data();
  const double* px = x.data();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(pi + i));
    const __m256d g = _mm256_i32gather_pd(px, idx, 8);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(pv + i), g, acc);
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += pv[i] * px[pi[i]];
  return total;
}

}  // namespace igl::kernels::avx2
