#pragma once

// Enumeration order of the v(alpha) index set; included from moments.hpp.

#include <cstdint>
#include <numeric>

namespace qlcm {

namespace detail {
/// Largest e with beta^e >= tol (beta^e taken from beta_powers).
std::uint32_t kept_exponent_limit(double beta, double tol);
}  // namespace detail

template <class Visit>
void for_each_series_member(double alpha, const TruncationConfig& config, Visit&& visit) {
  const std::uint64_t emax = detail::kept_exponent_limit(1.0 - alpha, config.beta_tail_tol);
  // Members satisfy min(j1, j2) >= j3, so e = j1 + j2 - j3 >= max(j1, j2) >= j3.
  for (std::uint64_t j3 = 1; j3 <= config.j3_max && j3 <= emax; ++j3) {
    for (std::uint64_t j1 = j3; j1 <= emax; ++j1) {
      for (std::uint64_t j2 = j3; j1 + j2 - j3 <= emax; ++j2) {
        // Open intervals j2/(j3+1) < a1 < (j2+1)/j3 and j1/(j3+1) < a2 < (j1+1)/j3.
        const std::uint64_t a1_lo = j2 / (j3 + 1) + 1;
        const std::uint64_t a1_hi = j2 / j3;
        const std::uint64_t a2_lo = j1 / (j3 + 1) + 1;
        const std::uint64_t a2_hi = j1 / j3;
        for (std::uint64_t a1 = a1_lo; a1 <= a1_hi; ++a1) {
          for (std::uint64_t a2 = a2_lo; a2 <= a2_hi; ++a2) {
            if (std::gcd(a1, a2) != 1) continue;
            const RhoBounds rho = rho_bounds(a1, a2, j1, j2, j3);
            if (!rho.member()) continue;
            visit(a1, a2, j1, j2, j3, rho);
          }
        }
      }
    }
  }
}

}  // namespace qlcm
