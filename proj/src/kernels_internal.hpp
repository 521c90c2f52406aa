#pragma once

#include "qlcm/simd.hpp"

namespace qlcm::simd::detail {

void bernoulli_bits_scalar(std::uint64_t key, std::uint64_t threshold, std::uint32_t n,
                           std::uint64_t* words);
std::uint64_t covered_phi_sum_scalar(const std::uint32_t* phi, const std::uint8_t* covered,
                                     std::uint32_t lo, std::uint32_t hi);
void expectation_terms_scalar(const std::uint32_t* phi, const std::uint32_t* jfloor,
                              const double* one_minus, std::uint32_t lo, std::uint32_t hi,
                              LaneSums& acc);
void variance_row_scalar(const VarianceRow& row, LaneSums& acc);

// Single-term helpers shared by the scalar kernels and the AVX2 tails.
inline double variance_term(const VarianceRow& row, std::uint32_t d2) noexcept {
  const std::uint64_t lcm = std::uint64_t{row.cofactor[d2]} * d2;
  const std::uint32_t j3 = static_cast<std::uint32_t>(row.n / lcm);
  const std::uint32_t both = row.j1 + row.jfloor[d2];
  const double phi2 = static_cast<double>(row.phi[d2]);
  return phi2 * (row.pw[both - j3] - row.pw[both]);
}

#if defined(QLCM_HAVE_AVX2)
extern const Kernels kAvx2Kernels;
#endif

}  // namespace qlcm::simd::detail
