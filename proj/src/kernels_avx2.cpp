#include <immintrin.h>

#include <algorithm>

#include "kernels_internal.hpp"
#include "qlcm/rng.hpp"

namespace qlcm::simd::detail {

namespace {

// Low 64 bits of a 64x64 product, per lane.
inline __m256i mullo_epi64(__m256i a, __m256i b) {
  const __m256i lo = _mm256_mul_epu32(a, b);
  const __m256i cross = _mm256_add_epi64(_mm256_mul_epu32(_mm256_srli_epi64(a, 32), b),
                                         _mm256_mul_epu32(a, _mm256_srli_epi64(b, 32)));
  return _mm256_add_epi64(lo, _mm256_slli_epi64(cross, 32));
}

inline __m256i mix64_avx2(__m256i z) {
  const __m256i m1 = _mm256_set1_epi64x(static_cast<long long>(0xBF58476D1CE4E5B9ull));
  const __m256i m2 = _mm256_set1_epi64x(static_cast<long long>(0x94D049BB133111EBull));
  z = mullo_epi64(_mm256_xor_si256(z, _mm256_srli_epi64(z, 30)), m1);
  z = mullo_epi64(_mm256_xor_si256(z, _mm256_srli_epi64(z, 27)), m2);
  return _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
}

struct KahanVec {
  __m256d sum;
  __m256d comp;

  explicit KahanVec(const LaneSums& acc)
      : sum(_mm256_loadu_pd(acc.sum.data())), comp(_mm256_loadu_pd(acc.comp.data())) {}

  void add(__m256d x) {
    const __m256d y = _mm256_sub_pd(x, comp);
    const __m256d t = _mm256_add_pd(sum, y);
    comp = _mm256_sub_pd(_mm256_sub_pd(t, sum), y);
    sum = t;
  }

  void store(LaneSums& acc) const {
    _mm256_storeu_pd(acc.sum.data(), sum);
    _mm256_storeu_pd(acc.comp.data(), comp);
  }
};

void bernoulli_bits_avx2(std::uint64_t key, std::uint64_t threshold, std::uint32_t n,
                         std::uint64_t* words) {
  std::fill_n(words, (std::size_t{n} + 63) / 64, 0);
  const __m256i step = _mm256_set1_epi64x(static_cast<long long>(4 * kGoldenGamma));
  const __m256i thr = _mm256_set1_epi64x(static_cast<long long>(threshold));
  // Counters key + k*gamma for k = 1..4.
  __m256i ctr = _mm256_set_epi64x(static_cast<long long>(key + 4 * kGoldenGamma),
                                  static_cast<long long>(key + 3 * kGoldenGamma),
                                  static_cast<long long>(key + 2 * kGoldenGamma),
                                  static_cast<long long>(key + 1 * kGoldenGamma));
  std::uint32_t k = 1;
  for (; k + 3 <= n; k += 4) {
    const __m256i u = _mm256_srli_epi64(mix64_avx2(ctr), 11);
    // Both operands are below 2^63, so the signed compare is exact.
    const __m256i hit = _mm256_cmpgt_epi64(thr, u);
    const auto mask = static_cast<std::uint64_t>(_mm256_movemask_pd(_mm256_castsi256_pd(hit)));
    words[(k - 1) >> 6] |= mask << ((k - 1) & 63);
    ctr = _mm256_add_epi64(ctr, step);
  }
  for (; k <= n; ++k) {
    if ((element_word(key, k) >> 11) < threshold) {
      words[(k - 1) >> 6] |= std::uint64_t{1} << ((k - 1) & 63);
    }
  }
}

std::uint64_t covered_phi_sum_avx2(const std::uint32_t* phi, const std::uint8_t* covered,
                                   std::uint32_t lo, std::uint32_t hi) {
  __m256i acc = _mm256_setzero_si256();
  const __m256i zero = _mm256_setzero_si256();
  std::uint32_t d = lo;
  for (; d + 8 <= hi; d += 8) {
    const __m128i bytes = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(covered + d));
    const __m256i flags = _mm256_cvtepu8_epi32(bytes);
    const __m256i keep = _mm256_xor_si256(_mm256_cmpeq_epi32(flags, zero), _mm256_set1_epi32(-1));
    const __m256i vals =
        _mm256_and_si256(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(phi + d)), keep);
    acc = _mm256_add_epi64(acc, _mm256_cvtepu32_epi64(_mm256_castsi256_si128(vals)));
    acc = _mm256_add_epi64(acc, _mm256_cvtepu32_epi64(_mm256_extracti128_si256(vals, 1)));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  return total + covered_phi_sum_scalar(phi, covered, d, hi);
}

void expectation_terms_avx2(const std::uint32_t* phi, const std::uint32_t* jfloor,
                            const double* one_minus, std::uint32_t lo, std::uint32_t hi,
                            LaneSums& acc) {
  KahanVec vec(acc);
  std::uint32_t d = lo;
  for (; d + 4 <= hi; d += 4) {
    const __m128i j = _mm_loadu_si128(reinterpret_cast<const __m128i*>(jfloor + d));
    const __m256d om = _mm256_i32gather_pd(one_minus, j, 8);
    const __m256d p =
        _mm256_cvtepi32_pd(_mm_loadu_si128(reinterpret_cast<const __m128i*>(phi + d)));
    vec.add(_mm256_mul_pd(p, om));
  }
  vec.store(acc);
  for (; d < hi; ++d) {
    acc.add((d - lo) % kLanes, static_cast<double>(phi[d]) * one_minus[jfloor[d]]);
  }
}

void variance_row_avx2(const VarianceRow& row, LaneSums& acc) {
  KahanVec vec(acc);
  const __m256d n = _mm256_set1_pd(static_cast<double>(row.n));
  const __m128i j1 = _mm_set1_epi32(static_cast<int>(row.j1));
  const __m256d four = _mm256_set1_pd(4.0);
  __m256d d2v = _mm256_set_pd(5.0, 4.0, 3.0, 2.0);
  std::uint32_t d2 = 2;
  for (; d2 + 4 <= row.d1; d2 += 4) {
    const __m256d cof = _mm256_cvtepi32_pd(
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(row.cofactor + d2)));
    const __m256d lcm = _mm256_mul_pd(cof, d2v);
    // floor(n / lcm) is exact in double for the operand sizes used here.
    const __m128i j3 = _mm256_cvttpd_epi32(
        _mm256_round_pd(_mm256_div_pd(n, lcm), _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC));
    const __m128i j2 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(row.jfloor + d2));
    const __m128i both = _mm_add_epi32(j1, j2);
    const __m256d hi = _mm256_i32gather_pd(row.pw, _mm_sub_epi32(both, j3), 8);
    const __m256d lo = _mm256_i32gather_pd(row.pw, both, 8);
    const __m256d phi2 =
        _mm256_cvtepi32_pd(_mm_loadu_si128(reinterpret_cast<const __m128i*>(row.phi + d2)));
    vec.add(_mm256_mul_pd(phi2, _mm256_sub_pd(hi, lo)));
    d2v = _mm256_add_pd(d2v, four);
  }
  vec.store(acc);
  for (; d2 < row.d1; ++d2) acc.add((d2 - 2) % kLanes, variance_term(row, d2));
}

}  // namespace

const Kernels kAvx2Kernels{
    Isa::avx2,
    &bernoulli_bits_avx2,
    &covered_phi_sum_avx2,
    &expectation_terms_avx2,
    &variance_row_avx2,
};

}  // namespace qlcm::simd::detail
