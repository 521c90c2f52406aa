#include "qlcm/qpoly.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "qlcm/errors.hpp"

namespace qlcm {

IntPoly::IntPoly(std::vector<mpz_class> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

IntPoly::IntPoly(std::initializer_list<long> coeffs) {
  coeffs_.reserve(coeffs.size());
  for (long c : coeffs) coeffs_.emplace_back(c);
  normalize();
}

IntPoly IntPoly::constant(long c) { return IntPoly({c}); }

IntPoly IntPoly::monomial(std::size_t k, long c) {
  std::vector<mpz_class> v(k + 1);
  v[k] = c;
  return IntPoly(std::move(v));
}

void IntPoly::normalize() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

mpz_class IntPoly::coeff(std::size_t i) const {
  return i < coeffs_.size() ? coeffs_[i] : mpz_class(0);
}

mpz_class IntPoly::content() const {
  mpz_class g = 0;
  for (const auto& c : coeffs_) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    if (g == 1) break;
  }
  return g;
}

IntPoly IntPoly::primitive_part() const {
  if (is_zero()) return {};
  mpz_class c = content();
  if (leading() < 0) c = -c;
  std::vector<mpz_class> v(coeffs_.size());
  for (std::size_t i = 0; i < v.size(); ++i) mpz_divexact(v[i].get_mpz_t(), coeffs_[i].get_mpz_t(), c.get_mpz_t());
  return IntPoly(std::move(v));
}

IntPoly IntPoly::operator-() const {
  IntPoly r = *this;
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

IntPoly operator+(const IntPoly& f, const IntPoly& g) {
  std::vector<mpz_class> v(std::max(f.coeffs_.size(), g.coeffs_.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.coeff(i) + g.coeff(i);
  return IntPoly(std::move(v));
}

IntPoly operator-(const IntPoly& f, const IntPoly& g) { return f + (-g); }

std::string IntPoly::to_string() const {
  if (is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (std::size_t i = coeffs_.size(); i-- > 0;) {
    const mpz_class& c = coeffs_[i];
    if (c == 0) continue;
    mpz_class mag = abs(c);
    if (first) {
      if (c < 0) out << '-';
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (mag != 1 || i == 0) out << mag.get_str();
    if (i >= 1) out << 'q';
    if (i >= 2) out << '^' << i;
  }
  return out.str();
}

IntPoly q_analog(std::uint32_t k) {
  if (k == 0) throw std::invalid_argument("q_analog: k must be positive");
  return IntPoly(std::vector<mpz_class>(k, mpz_class(1)));
}

IntPoly poly_mul(const IntPoly& f, const IntPoly& g) {
  if (f.is_zero() || g.is_zero()) return {};
  const auto& a = f.coeffs();
  const auto& b = g.coeffs();
  std::vector<mpz_class> v(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      mpz_addmul(v[i + j].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
    }
  }
  return IntPoly(std::move(v));
}

IntPoly poly_divexact(const IntPoly& f, const IntPoly& g) {
  if (g.is_zero()) throw std::invalid_argument("poly_divexact: division by zero polynomial");
  if (f.is_zero()) return {};
  if (f.degree() < g.degree()) throw ExactnessError("poly_divexact: divisor has larger degree");

  std::vector<mpz_class> rem = f.coeffs();
  const auto& d = g.coeffs();
  const std::size_t dg = d.size() - 1;
  const std::size_t qlen = rem.size() - dg;
  std::vector<mpz_class> quot(qlen);
  mpz_class r;
  for (std::size_t i = qlen; i-- > 0;) {
    const mpz_class& top = rem[i + dg];
    if (top == 0) continue;
    mpz_fdiv_qr(quot[i].get_mpz_t(), r.get_mpz_t(), top.get_mpz_t(), d[dg].get_mpz_t());
    if (r != 0) throw ExactnessError("poly_divexact: leading coefficient does not divide");
    for (std::size_t j = 0; j <= dg; ++j) {
      mpz_submul(rem[i + j].get_mpz_t(), quot[i].get_mpz_t(), d[j].get_mpz_t());
    }
  }
  for (std::size_t j = 0; j < dg; ++j) {
    if (rem[j] != 0) throw ExactnessError("poly_divexact: nonzero remainder");
  }
  return IntPoly(std::move(quot));
}

IntPoly poly_pseudo_remainder(const IntPoly& f, const IntPoly& g) {
  if (g.is_zero()) throw std::invalid_argument("poly_pseudo_remainder: zero divisor");
  if (f.degree() < g.degree()) return f;
  std::vector<mpz_class> rem = f.coeffs();
  const auto& d = g.coeffs();
  const std::size_t dg = d.size() - 1;
  const mpz_class& lc = d[dg];
  long steps_left = f.degree() - g.degree() + 1;
  mpz_class top;
  for (std::size_t top_idx = rem.size() - 1; top_idx >= dg; --top_idx) {
    top = rem[top_idx];
    if (top != 0) {
      // rem := lc * rem - top * q^(top_idx - dg) * g
      for (auto& c : rem) c *= lc;
      const std::size_t shift = top_idx - dg;
      for (std::size_t j = 0; j <= dg; ++j) {
        mpz_submul(rem[shift + j].get_mpz_t(), top.get_mpz_t(), d[j].get_mpz_t());
      }
      --steps_left;
    }
    rem.pop_back();
    if (top_idx == dg) break;
  }
  if (steps_left > 0) {
    mpz_class scale;
    mpz_pow_ui(scale.get_mpz_t(), lc.get_mpz_t(), static_cast<unsigned long>(steps_left));
    for (auto& c : rem) c *= scale;
  }
  return IntPoly(std::move(rem));
}

IntPoly poly_gcd(const IntPoly& f, const IntPoly& g) {
  if (f.is_zero()) return g.is_zero() || g.leading() > 0 ? g : -g;
  if (g.is_zero()) return f.leading() > 0 ? f : -f;

  mpz_class content = gcd(f.content(), g.content());
  IntPoly a = f.primitive_part();
  IntPoly b = g.primitive_part();
  if (a.degree() < b.degree()) std::swap(a, b);
  while (!b.is_zero()) {
    IntPoly r = poly_pseudo_remainder(a, b);
    a = std::move(b);
    b = r.primitive_part();
  }
  std::vector<mpz_class> v = a.coeffs();
  for (auto& c : v) c *= content;
  return IntPoly(std::move(v));
}

IntPoly poly_lcm(const IntPoly& f, const IntPoly& g) {
  if (f.is_zero() || g.is_zero()) return {};
  IntPoly l = poly_divexact(poly_mul(f, g), poly_gcd(f, g));
  return l.primitive_part();
}

namespace {

std::mutex cyclotomic_mutex;
std::unordered_map<std::uint32_t, IntPoly>& cyclotomic_cache() {
  static std::unordered_map<std::uint32_t, IntPoly> cache;
  return cache;
}

void check_elements(std::span<const std::uint32_t> set, std::uint32_t limit) {
  for (std::uint32_t k : set) {
    if (k == 0 || k > limit) {
      throw std::out_of_range("lcm oracle: element " + std::to_string(k) +
                              " outside 1.." + std::to_string(limit));
    }
  }
}

}  // namespace

IntPoly cyclotomic(std::uint32_t d) {
  if (d == 0) throw std::invalid_argument("cyclotomic: d must be positive");
  {
    std::lock_guard lock(cyclotomic_mutex);
    auto& cache = cyclotomic_cache();
    if (auto it = cache.find(d); it != cache.end()) return it->second;
  }
  IntPoly result = IntPoly::monomial(d) - IntPoly::constant(1);
  for (std::uint32_t e = 1; e < d; ++e) {
    if (d % e == 0) result = poly_divexact(result, cyclotomic(e));
  }
  std::lock_guard lock(cyclotomic_mutex);
  return cyclotomic_cache().try_emplace(d, std::move(result)).first->second;
}

std::uint64_t lcm_degree_oracle(std::span<const std::uint32_t> set, std::uint32_t limit) {
  check_elements(set, limit);
  if (set.empty()) return 0;
  const std::uint32_t top = *std::max_element(set.begin(), set.end());
  std::vector<bool> closure(top + 1, false);
  for (std::uint32_t k : set) {
    for (std::uint32_t d = 2; d <= k; ++d) {
      if (k % d == 0) closure[d] = true;
    }
  }
  IntPoly product = IntPoly::constant(1);
  for (std::uint32_t d = 2; d <= top; ++d) {
    if (closure[d]) product = poly_mul(product, cyclotomic(d));
  }
  return static_cast<std::uint64_t>(product.degree());
}

std::uint64_t lcm_degree_oracle_gcd(std::span<const std::uint32_t> set, std::uint32_t limit) {
  check_elements(set, limit);
  IntPoly acc = IntPoly::constant(1);
  for (std::uint32_t k : set) acc = poly_lcm(acc, q_analog(k));
  return static_cast<std::uint64_t>(acc.degree());
}

}  // namespace qlcm
