#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qlcm {

/// Dense polynomial in Z[q], coefficients lowest degree first.
///
/// The coefficient vector is kept normalized: no trailing zeros, so the zero
/// polynomial has an empty vector and degree() == -1.
class IntPoly {
 public:
  IntPoly() = default;
  explicit IntPoly(std::vector<mpz_class> coeffs);
  IntPoly(std::initializer_list<long> coeffs);

  static IntPoly constant(long c);
  /// q^k.
  static IntPoly monomial(std::size_t k, long c = 1);

  bool is_zero() const noexcept { return coeffs_.empty(); }
  long degree() const noexcept { return static_cast<long>(coeffs_.size()) - 1; }
  const std::vector<mpz_class>& coeffs() const noexcept { return coeffs_; }
  /// Coefficient of q^i (zero beyond the degree).
  mpz_class coeff(std::size_t i) const;
  const mpz_class& leading() const { return coeffs_.back(); }

  /// gcd of the coefficients, nonnegative; zero for the zero polynomial.
  mpz_class content() const;
  /// this / content(), with positive leading coefficient.
  IntPoly primitive_part() const;

  IntPoly operator-() const;
  friend IntPoly operator+(const IntPoly& f, const IntPoly& g);
  friend IntPoly operator-(const IntPoly& f, const IntPoly& g);
  friend bool operator==(const IntPoly& f, const IntPoly& g) { return f.coeffs_ == g.coeffs_; }

  std::string to_string() const;

 private:
  void normalize();
  std::vector<mpz_class> coeffs_;
};

/// [k]_q = 1 + q + ... + q^{k-1}. Throws std::invalid_argument for k == 0.
IntPoly q_analog(std::uint32_t k);

/// Schoolbook product.
IntPoly poly_mul(const IntPoly& f, const IntPoly& g);

/// Quotient h with g*h == f. Throws qlcm::ExactnessError if g does not divide f
/// over the integers, std::invalid_argument if g is zero.
IntPoly poly_divexact(const IntPoly& f, const IntPoly& g);

/// Pseudo-remainder of f by g: lc(g)^(deg f - deg g + 1) * f mod g.
IntPoly poly_pseudo_remainder(const IntPoly& f, const IntPoly& g);

/// gcd in Z[q] (content gcd times primitive PRS gcd), positive leading coefficient.
IntPoly poly_gcd(const IntPoly& f, const IntPoly& g);

/// f*g / gcd(f, g), primitive with positive leading coefficient.
IntPoly poly_lcm(const IntPoly& f, const IntPoly& g);

/// d-th cyclotomic polynomial. Memoized process-wide behind a mutex.
/// Throws std::invalid_argument for d == 0.
IntPoly cyclotomic(std::uint32_t d);

/// Default bound on set elements accepted by the lcm oracles.
inline constexpr std::uint32_t kOracleLimit = 512;

/// Degree of lcm{[k]_q : k in set}: multiplies Phi_d over the divisor closure
/// {d > 1 : d | k for some k in set} and reports the product's degree.
/// Throws std::out_of_range for elements of 0 or above `limit`.
std::uint64_t lcm_degree_oracle(std::span<const std::uint32_t> set,
                                std::uint32_t limit = kOracleLimit);

/// Same quantity through iterated poly_lcm of the q-analogs themselves.
std::uint64_t lcm_degree_oracle_gcd(std::span<const std::uint32_t> set,
                                    std::uint32_t limit = kOracleLimit);

}  // namespace qlcm
