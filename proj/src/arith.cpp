#include "qlcm/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qlcm {

ArithTables::ArithTables(std::uint32_t limit)
    : limit_(limit),
      phi_(limit + 1, 0),
      mobius_(limit + 1, 0),
      tau_(limit + 1, 0),
      sigma_(limit + 1, 0),
      spf_(limit + 1, 0),
      phi_prefix_(limit + 1, 0),
      tau_prefix_(limit + 1, 0) {
  if (limit == 0) {
    throw std::invalid_argument("build_tables: limit must be at least 1");
  }
  // Largest power of spf(m) dividing m, and its exponent.
  std::vector<std::uint32_t> spf_power(limit + 1, 0);
  std::vector<std::uint8_t> spf_exp(limit + 1, 0);

  phi_[1] = 1;
  mobius_[1] = 1;
  tau_[1] = 1;
  sigma_[1] = 1;
  spf_[1] = 1;
  spf_power[1] = 1;

  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (spf_[i] == 0) {
      const auto p = static_cast<std::uint32_t>(i);
      primes_.push_back(p);
      spf_[i] = p;
      spf_power[i] = p;
      spf_exp[i] = 1;
      phi_[i] = p - 1;
      mobius_[i] = -1;
      tau_[i] = 2;
      sigma_[i] = std::uint64_t{p} + 1;
    }
    for (std::uint32_t p : primes_) {
      const std::uint64_t m = i * p;
      if (p > spf_[i] || m > limit) break;
      spf_[m] = p;
      if (p == spf_[i]) {
        const std::uint64_t rest = i / spf_power[i];
        const std::uint64_t power = std::uint64_t{spf_power[i]} * p;
        spf_power[m] = static_cast<std::uint32_t>(power);
        spf_exp[m] = spf_exp[i] + 1;
        phi_[m] = phi_[i] * p;
        mobius_[m] = 0;
        tau_[m] = tau_[rest] * (spf_exp[m] + 1u);
        sigma_[m] = sigma_[rest] * ((power * p - 1) / (p - 1));
      } else {
        spf_power[m] = p;
        spf_exp[m] = 1;
        phi_[m] = phi_[i] * (p - 1);
        mobius_[m] = static_cast<std::int8_t>(-mobius_[i]);
        tau_[m] = tau_[i] * 2;
        sigma_[m] = sigma_[i] * (std::uint64_t{p} + 1);
      }
    }
  }

  for (std::uint32_t m = 1; m <= limit; ++m) {
    phi_prefix_[m] = phi_prefix_[m - 1] + phi_[m];
    tau_prefix_[m] = tau_prefix_[m - 1] + tau_[m];
  }
}

std::vector<std::uint32_t> ArithTables::prime_factors(std::uint32_t m) const {
  std::vector<std::uint32_t> out;
  while (m > 1) {
    const std::uint32_t p = spf_[m];
    out.push_back(p);
    while (m % p == 0) m /= p;
  }
  return out;
}

std::vector<std::uint32_t> ArithTables::divisors(std::uint32_t m) const {
  std::vector<std::uint32_t> out{1};
  while (m > 1) {
    const std::uint32_t p = spf_[m];
    const std::size_t base = out.size();
    std::uint32_t pk = 1;
    while (m % p == 0) {
      m /= p;
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint32_t ArithTables::radical(std::uint32_t m) const {
  std::uint32_t r = 1;
  for (std::uint32_t p : prime_factors(m)) r *= p;
  return r;
}

ArithTables build_tables(std::uint32_t limit) { return ArithTables(limit); }

namespace {

std::uint64_t floor_arg(double x) {
  if (std::isnan(x)) throw std::invalid_argument("summatory: x is NaN");
  if (x < 1.0) return 0;
  return static_cast<std::uint64_t>(std::floor(x));
}

void check_range(const ArithTables& tables, std::uint64_t m, const char* what) {
  if (m > tables.limit()) {
    throw std::out_of_range(std::string(what) + ": argument " + std::to_string(m) +
                            " exceeds table limit " + std::to_string(tables.limit()));
  }
}

}  // namespace

std::uint64_t phi_summatory(const ArithTables& tables, std::uint64_t x) {
  check_range(tables, x, "phi_summatory");
  return tables.phi_prefix()[x];
}

std::uint64_t phi_summatory(const ArithTables& tables, double x) {
  return phi_summatory(tables, floor_arg(x));
}

std::uint64_t tau_summatory(const ArithTables& tables, std::uint64_t x) {
  check_range(tables, x, "tau_summatory");
  return tables.tau_prefix()[x];
}

std::uint64_t tau_summatory(const ArithTables& tables, double x) {
  return tau_summatory(tables, floor_arg(x));
}

std::uint64_t phi_pair_summatory(const ArithTables& tables, std::uint64_t a1,
                                 std::uint64_t a2, double x) {
  if (a1 == 0 || a2 == 0) {
    throw std::invalid_argument("phi_pair_summatory: a1 and a2 must be positive");
  }
  const std::uint64_t top = floor_arg(x);
  if (top == 0) return 0;
  std::uint64_t reach1 = 0;
  std::uint64_t reach2 = 0;
  if (__builtin_mul_overflow(a1, top, &reach1) || __builtin_mul_overflow(a2, top, &reach2)) {
    throw std::out_of_range("phi_pair_summatory: a_i * x overflows");
  }
  check_range(tables, reach1, "phi_pair_summatory");
  check_range(tables, reach2, "phi_pair_summatory");

  std::uint64_t total = 0;
  for (std::uint64_t m = 1; m <= top; ++m) {
    std::uint64_t term = 0;
    if (__builtin_mul_overflow(std::uint64_t{tables.phi(static_cast<std::uint32_t>(a1 * m))},
                               std::uint64_t{tables.phi(static_cast<std::uint32_t>(a2 * m))},
                               &term) ||
        __builtin_add_overflow(total, term, &total)) {
      throw std::overflow_error("phi_pair_summatory: sum exceeds 64 bits");
    }
  }
  return total;
}

GcdLcm gcd_lcm(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) throw std::invalid_argument("gcd_lcm: inputs must be positive");
  const std::uint64_t g = std::gcd(a, b);
  std::uint64_t l = 0;
  if (__builtin_mul_overflow(a / g, b, &l)) {
    throw std::overflow_error("gcd_lcm: lcm exceeds 64 bits");
  }
  return {g, l};
}

}  // namespace qlcm
