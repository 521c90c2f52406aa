#include <algorithm>

#include "kernels_internal.hpp"
#include "qlcm/rng.hpp"

namespace qlcm::simd::detail {

void bernoulli_bits_scalar(std::uint64_t key, std::uint64_t threshold, std::uint32_t n,
                           std::uint64_t* words) {
  std::fill_n(words, (std::size_t{n} + 63) / 64, 0);
  for (std::uint32_t k = 1; k <= n; ++k) {
    if ((element_word(key, k) >> 11) < threshold) {
      words[(k - 1) >> 6] |= std::uint64_t{1} << ((k - 1) & 63);
    }
  }
}

std::uint64_t covered_phi_sum_scalar(const std::uint32_t* phi, const std::uint8_t* covered,
                                     std::uint32_t lo, std::uint32_t hi) {
  std::uint64_t total = 0;
  for (std::uint32_t d = lo; d < hi; ++d) {
    if (covered[d]) total += phi[d];
  }
  return total;
}

void expectation_terms_scalar(const std::uint32_t* phi, const std::uint32_t* jfloor,
                              const double* one_minus, std::uint32_t lo, std::uint32_t hi,
                              LaneSums& acc) {
  for (std::uint32_t d = lo; d < hi; ++d) {
    acc.add((d - lo) % kLanes, static_cast<double>(phi[d]) * one_minus[jfloor[d]]);
  }
}

void variance_row_scalar(const VarianceRow& row, LaneSums& acc) {
  for (std::uint32_t d2 = 2; d2 < row.d1; ++d2) {
    acc.add((d2 - 2) % kLanes, variance_term(row, d2));
  }
}

}  // namespace qlcm::simd::detail
