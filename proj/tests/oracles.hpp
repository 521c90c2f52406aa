#pragma once

// Test-only reference implementations. Each one takes a different route from
// the library code it checks: trial division, explicit divisor closures,
// Euler products, plain series.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <vector>

namespace qlcm::oracle {

inline std::uint64_t totient(std::uint64_t m) {
  std::uint64_t count = 0;
  for (std::uint64_t k = 1; k <= m; ++k) count += std::gcd(k, m) == 1;
  return count;
}

inline std::vector<std::uint64_t> divisors(std::uint64_t m) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 1; d <= m; ++d) {
    if (m % d == 0) out.push_back(d);
  }
  return out;
}

inline int mobius(std::uint64_t m) {
  int sign = 1;
  for (std::uint64_t p = 2; p * p <= m; ++p) {
    if (m % p) continue;
    m /= p;
    if (m % p == 0) return 0;
    sign = -sign;
  }
  return m > 1 ? -sign : sign;
}

/// X(A) through the divisor closure, with totients by gcd counting.
inline std::uint64_t degree_by_closure(const std::vector<std::uint32_t>& set) {
  std::set<std::uint64_t> closure;
  for (std::uint32_t k : set) {
    for (std::uint64_t d : divisors(k)) {
      if (d > 1) closure.insert(d);
    }
  }
  std::uint64_t x = 0;
  for (std::uint64_t d : closure) x += totient(d);
  return x;
}

struct Moments {
  mpq_class mean;
  mpq_class variance;
};

/// E[X], V[X] under B(n, alpha) by listing every subset explicitly.
inline Moments enumerate_moments(std::uint32_t n, const mpq_class& alpha) {
  mpq_class m1 = 0;
  mpq_class m2 = 0;
  const mpq_class beta = 1 - alpha;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::uint32_t> set;
    mpq_class p = 1;
    for (std::uint32_t k = 1; k <= n; ++k) {
      if (mask >> (k - 1) & 1u) {
        set.push_back(k);
        p *= alpha;
      } else {
        p *= beta;
      }
    }
    const mpq_class x(mpz_class(static_cast<unsigned long>(degree_by_closure(set))));
    m1 += p * x;
    m2 += p * x * x;
  }
  Moments out{m1, m2 - m1 * m1};
  out.mean.canonicalize();
  out.variance.canonicalize();
  return out;
}

/// C1(a1, a2) as an Euler product: per prime, the four (d1, d2) in {1, p}^2
/// terms of the defining series, evaluated straight from the definition.
inline double c1_euler_product(std::uint64_t a1, std::uint64_t a2, std::uint64_t prime_bound) {
  std::vector<bool> composite(prime_bound + 1, false);
  long double log_product = 0.0L;
  for (std::uint64_t p = 2; p <= prime_bound; ++p) {
    if (composite[p]) continue;
    for (std::uint64_t q = p * p; q <= prime_bound; q += p) composite[q] = true;
    long double local = 0.0L;
    for (int x = 0; x <= 1; ++x) {
      for (int y = 0; y <= 1; ++y) {
        const std::uint64_t d1 = x ? p : 1;
        const std::uint64_t d2 = y ? p : 1;
        const std::uint64_t d1p = d1 / std::gcd(a1, d1);
        const std::uint64_t d2p = d2 / std::gcd(a2, d2);
        const std::uint64_t l = std::lcm(d1p, d2p);
        const long double sign = ((x + y) % 2) ? -1.0L : 1.0L;
        local += sign / (static_cast<long double>(d1) * d2 * l);
      }
    }
    log_product += std::log(local);
  }
  return static_cast<double>(static_cast<long double>(a1 * a2) / 3.0L * std::exp(log_product));
}

/// Li2 by its defining series in long double.
inline double dilog_series(double z, int terms = 2000000) {
  long double sum = 0.0L;
  long double zk = z;
  for (int k = 1; k <= terms; ++k) {
    sum += zk / (static_cast<long double>(k) * k);
    zk *= z;
    if (zk == 0.0L) break;
  }
  return static_cast<double>(sum);
}

}  // namespace qlcm::oracle
