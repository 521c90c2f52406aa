#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace qlcm {

/// Arithmetic functions on 1..limit produced by a single linear sieve.
///
/// Index m of every array holds the value at m; index 0 is unused (zero).
/// The object is immutable after construction and may be shared by readers.
class ArithTables {
 public:
  explicit ArithTables(std::uint32_t limit);

  std::uint32_t limit() const noexcept { return limit_; }

  std::uint32_t phi(std::uint32_t m) const { return phi_[m]; }
  int mobius(std::uint32_t m) const { return mobius_[m]; }
  std::uint32_t tau(std::uint32_t m) const { return tau_[m]; }
  std::uint64_t sigma(std::uint32_t m) const { return sigma_[m]; }
  /// Smallest prime factor; spf(1) == 1 by convention.
  std::uint32_t spf(std::uint32_t m) const { return spf_[m]; }
  bool is_prime(std::uint32_t m) const { return m >= 2 && spf_[m] == m; }

  std::span<const std::uint32_t> phi_array() const noexcept { return phi_; }
  std::span<const std::int8_t> mobius_array() const noexcept { return mobius_; }
  std::span<const std::uint32_t> tau_array() const noexcept { return tau_; }
  std::span<const std::uint64_t> sigma_array() const noexcept { return sigma_; }
  std::span<const std::uint32_t> spf_array() const noexcept { return spf_; }
  std::span<const std::uint32_t> primes() const noexcept { return primes_; }

  /// Prefix sums: phi_prefix()[m] = phi(1) + ... + phi(m).
  std::span<const std::uint64_t> phi_prefix() const noexcept { return phi_prefix_; }
  std::span<const std::uint64_t> tau_prefix() const noexcept { return tau_prefix_; }

  /// Distinct prime factors of m in increasing order.
  std::vector<std::uint32_t> prime_factors(std::uint32_t m) const;
  /// All divisors of m in increasing order.
  std::vector<std::uint32_t> divisors(std::uint32_t m) const;
  /// Product of the distinct primes dividing m.
  std::uint32_t radical(std::uint32_t m) const;

 private:
  std::uint32_t limit_;
  std::vector<std::uint32_t> phi_;
  std::vector<std::int8_t> mobius_;
  std::vector<std::uint32_t> tau_;
  std::vector<std::uint64_t> sigma_;
  std::vector<std::uint32_t> spf_;
  std::vector<std::uint32_t> primes_;
  std::vector<std::uint64_t> phi_prefix_;
  std::vector<std::uint64_t> tau_prefix_;
};

/// Throws std::invalid_argument for limit == 0.
ArithTables build_tables(std::uint32_t limit);

/// Sum of phi(m) over m <= floor(x). Returns 0 for x < 1.
/// Throws std::out_of_range when floor(x) exceeds the table limit.
std::uint64_t phi_summatory(const ArithTables& tables, double x);
std::uint64_t phi_summatory(const ArithTables& tables, std::uint64_t x);

/// Sum of tau(m) over m <= floor(x). Same domain rules as phi_summatory.
std::uint64_t tau_summatory(const ArithTables& tables, double x);
std::uint64_t tau_summatory(const ArithTables& tables, std::uint64_t x);

/// Sum of phi(a1*m)*phi(a2*m) over m <= floor(x), exact.
/// Throws std::out_of_range if a_i*floor(x) exceeds the table and
/// std::overflow_error if the sum does not fit in 64 bits.
std::uint64_t phi_pair_summatory(const ArithTables& tables, std::uint64_t a1,
                                 std::uint64_t a2, double x);

struct GcdLcm {
  std::uint64_t gcd;
  std::uint64_t lcm;
  friend bool operator==(const GcdLcm&, const GcdLcm&) = default;
};

/// Throws std::invalid_argument on zero input, std::overflow_error if the lcm
/// does not fit in 64 bits.
GcdLcm gcd_lcm(std::uint64_t a, std::uint64_t b);

}  // namespace qlcm
