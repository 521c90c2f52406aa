#include "qlcm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "qlcm/errors.hpp"
#include "qlcm/parallel.hpp"
#include "qlcm/simd.hpp"

namespace qlcm {

namespace {

struct Kahan {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) noexcept {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  double value() const noexcept { return sum - comp; }
};

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha: must lie in [0, 1]");
}

void check_alpha(const mpq_class& alpha) {
  if (alpha < 0 || alpha > 1) throw std::invalid_argument("alpha: must lie in [0, 1]");
}

void check_n(std::uint32_t n, const ArithTables& tables) {
  if (n == 0) throw std::invalid_argument("n: must be at least 1");
  if (tables.limit() < n) {
    throw std::out_of_range("arith tables cover 1.." + std::to_string(tables.limit()) +
                            " but n = " + std::to_string(n));
  }
}

void check_rational_n(std::uint32_t n) {
  if (n > kRationalLimit) {
    throw ResourceLimitError("exact rational mode supports n <= " +
                             std::to_string(kRationalLimit));
  }
}

void check_variance_limit(std::uint32_t n, std::uint32_t limit) {
  if (n > limit) {
    throw ResourceLimitError("variance: n = " + std::to_string(n) +
                             " exceeds the quadratic-sum limit " + std::to_string(limit));
  }
}

double pow_by_squaring(double base, std::uint64_t exp) noexcept {
  double result = 1.0;
  while (exp) {
    if (exp & 1u) result *= base;
    base *= base;
    exp >>= 1;
  }
  return result;
}

std::vector<mpq_class> rational_powers(const mpq_class& base, std::size_t count) {
  std::vector<mpq_class> out(count);
  if (count) out[0] = 1;
  for (std::size_t k = 1; k < count; ++k) out[k] = out[k - 1] * base;
  return out;
}

std::vector<std::uint32_t> floor_quotients(std::uint32_t n) {
  std::vector<std::uint32_t> q(std::size_t{n} + 1, 0);
  for (std::uint32_t d = 1; d <= n; ++d) q[d] = n / d;
  return q;
}

std::uint64_t totient(std::uint64_t a) {
  std::uint64_t result = a;
  for (std::uint64_t p = 2; p * p <= a; ++p) {
    if (a % p) continue;
    while (a % p == 0) a /= p;
    result -= result / p;
  }
  if (a > 1) result -= result / a;
  return result;
}

std::uint64_t divisor_sigma(std::uint64_t a) {
  std::uint64_t result = 1;
  for (std::uint64_t p = 2; p * p <= a; ++p) {
    if (a % p) continue;
    std::uint64_t term = 1;
    std::uint64_t pk = 1;
    while (a % p == 0) {
      a /= p;
      pk *= p;
      term += pk;
    }
    result *= term;
  }
  if (a > 1) result *= a + 1;
  return result;
}

std::uint64_t radical_of(std::uint64_t a) {
  std::uint64_t r = 1;
  for (std::uint64_t p = 2; p * p <= a; ++p) {
    if (a % p) continue;
    r *= p;
    while (a % p == 0) a /= p;
  }
  return a > 1 ? r * a : r;
}

}  // namespace

void TruncationConfig::validate() const {
  if (c1_cutoff == 0) throw std::invalid_argument("c1_cutoff: must be positive");
  if (j3_max == 0) throw std::invalid_argument("j3_max: must be positive");
  if (!(beta_tail_tol > 0.0 && beta_tail_tol <= 1e-3)) {
    throw std::invalid_argument("beta_tail_tol: must lie in (0, 1e-3]");
  }
  if (!(dilog_tol > 0.0 && dilog_tol <= 1e-3)) {
    throw std::invalid_argument("dilog_tol: must lie in (0, 1e-3]");
  }
}

// ---------------------------------------------------------------------------
// Special functions

double dilog(double z, double tol) {
  if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("dilog: z must lie in [0, 1]");
  constexpr double kZeta2 = std::numbers::pi * std::numbers::pi / 6.0;
  if (z == 0.0) return 0.0;
  if (z == 1.0) return kZeta2;
  if (z > 0.5) {
    return kZeta2 - std::log(z) * std::log1p(-z) - dilog(1.0 - z, tol);
  }
  double sum = 0.0;
  double zk = z;
  for (int k = 1; k < 100000; ++k) {
    const double term = zk / (static_cast<double>(k) * k);
    sum += term;
    if (term < tol * sum) break;
    zk *= z;
  }
  return sum;
}

double alpha_factor(double alpha) {
  check_alpha(alpha);
  if (alpha == 0.0) return 0.0;
  if (alpha == 1.0) return 1.0;
  const double beta = 1.0 - alpha;
  return alpha * dilog(beta) / beta;
}

std::vector<double> beta_powers(double beta, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = pow_by_squaring(beta, k);
  return out;
}

// ---------------------------------------------------------------------------
// Expectation

double expectation_exact(std::uint32_t n, double alpha, const ArithTables& tables) {
  check_alpha(alpha);
  check_n(n, tables);
  if (n < 2) return 0.0;
  const std::vector<double> pw = beta_powers(1.0 - alpha, std::size_t{n} + 1);
  std::vector<double> one_minus(pw.size());
  for (std::size_t j = 0; j < pw.size(); ++j) one_minus[j] = 1.0 - pw[j];
  const std::vector<std::uint32_t> jfloor = floor_quotients(n);
  simd::LaneSums acc;
  simd::active().expectation_terms(tables.phi_array().data(), jfloor.data(), one_minus.data(),
                                   2, n + 1, acc);
  return acc.total();
}

mpq_class expectation_exact_rational(std::uint32_t n, const mpq_class& alpha,
                                     const ArithTables& tables) {
  check_alpha(alpha);
  check_n(n, tables);
  check_rational_n(n);
  const std::vector<mpq_class> pw = rational_powers(1 - alpha, std::size_t{n} + 1);
  mpq_class total = 0;
  for (std::uint32_t d = 2; d <= n; ++d) total += tables.phi(d) * (1 - pw[n / d]);
  total.canonicalize();
  return total;
}

double expectation_grouped(std::uint32_t n, double alpha, const ArithTables& tables) {
  check_alpha(alpha);
  check_n(n, tables);
  const double beta = 1.0 - alpha;
  const std::vector<double> pw = beta_powers(beta, std::size_t{n} + 1);
  Kahan acc;
  for (std::uint32_t j = 1; j <= n; ++j) {
    acc.add(pw[j - 1] * static_cast<double>(tables.phi_prefix()[n / j]));
  }
  // The grouped sum runs over d >= 1; drop the d = 1 addend 1 - beta^n.
  return alpha * acc.value() - (1.0 - pw[n]);
}

mpq_class expectation_grouped_rational(std::uint32_t n, const mpq_class& alpha,
                                       const ArithTables& tables) {
  check_alpha(alpha);
  check_n(n, tables);
  check_rational_n(n);
  const std::vector<mpq_class> pw = rational_powers(1 - alpha, std::size_t{n} + 1);
  mpq_class total = 0;
  for (std::uint32_t j = 1; j <= n; ++j) {
    total += pw[j - 1] * mpq_class(mpz_class(static_cast<unsigned long>(tables.phi_prefix()[n / j])));
  }
  mpq_class result = alpha * total - (1 - pw[n]);
  result.canonicalize();
  return result;
}

double expectation_asymptotic(std::uint64_t n, double alpha) {
  const double nn = static_cast<double>(n);
  return 3.0 / (std::numbers::pi * std::numbers::pi) * alpha_factor(alpha) * nn * nn;
}

// ---------------------------------------------------------------------------
// Variance

double variance_exact(std::uint32_t n, double alpha, const ArithTables& tables,
                      unsigned threads, std::uint32_t limit) {
  check_alpha(alpha);
  check_n(n, tables);
  check_variance_limit(n, limit);
  if (n < 2) return 0.0;
  const std::vector<double> pw = beta_powers(1.0 - alpha, 2 * std::size_t{n} + 1);
  const auto phi = tables.phi_array();

  // d1 = g*a1, d2 = g*a2 with gcd(a1, a2) = 1 and lcm = g*a1*a2 <= n.
  std::vector<double> per_gcd(std::size_t{n} + 1, 0.0);
  parallel_for(n, threads, [&](std::size_t index, unsigned) {
    const auto g = static_cast<std::uint32_t>(index + 1);
    Kahan acc;
    for (std::uint32_t a1 = 1; std::uint64_t{g} * a1 <= n; ++a1) {
      const std::uint32_t d1 = g * a1;
      if (d1 < 2) continue;
      const std::uint32_t j1 = n / d1;
      const std::uint32_t a2_max = std::min(a1, n / d1);
      for (std::uint32_t a2 = 1; a2 <= a2_max; ++a2) {
        const std::uint32_t d2 = g * a2;
        if (d2 < 2 || std::gcd(a1, a2) != 1) continue;
        const std::uint32_t j2 = n / d2;
        const std::uint32_t j3 = n / (d1 * a2);
        const double term = static_cast<double>(phi[d1]) * static_cast<double>(phi[d2]) *
                            (pw[j1 + j2 - j3] - pw[j1 + j2]);
        acc.add(a1 == a2 ? term : 2.0 * term);
      }
    }
    per_gcd[g] = acc.value();
  });
  Kahan total;
  for (double v : per_gcd) total.add(v);
  return total.value();
}

double variance_exact_quadratic(std::uint32_t n, double alpha, const ArithTables& tables,
                                unsigned threads, std::uint32_t limit) {
  check_alpha(alpha);
  check_n(n, tables);
  check_variance_limit(n, limit);
  if (n < 2) return 0.0;
  const std::vector<double> pw = beta_powers(1.0 - alpha, 2 * std::size_t{n} + 1);
  const std::vector<std::uint32_t> jfloor = floor_quotients(n);
  const auto phi = tables.phi_array();
  const simd::Kernels& kernels = simd::active();

  const unsigned workers = effective_workers(n - 1, threads);
  std::vector<std::vector<std::uint32_t>> cofactor(workers,
                                                   std::vector<std::uint32_t>(std::size_t{n} + 8));
  std::vector<double> per_row(std::size_t{n} + 1, 0.0);
  parallel_for(n - 1, workers, [&](std::size_t index, unsigned w) {
    const auto d1 = static_cast<std::uint32_t>(index + 2);
    auto& cof = cofactor[w];
    // cof[d2] = d1 / gcd(d1, d2): larger divisors of d1 overwrite smaller ones.
    for (std::uint32_t e : tables.divisors(d1)) {
      for (std::uint32_t m = e; m < d1; m += e) cof[m] = d1 / e;
    }
    simd::VarianceRow row{n, d1, jfloor[d1], cof.data(), phi.data(), jfloor.data(), pw.data()};
    simd::LaneSums acc;
    kernels.variance_row(row, acc);
    const std::uint32_t j1 = jfloor[d1];
    const double phi1 = static_cast<double>(phi[d1]);
    const double diagonal = phi1 * (pw[j1] - pw[2 * j1]);
    per_row[d1] = phi1 * (2.0 * acc.total() + diagonal);
  });
  Kahan total;
  for (double v : per_row) total.add(v);
  return total.value();
}

mpq_class variance_exact_rational(std::uint32_t n, const mpq_class& alpha,
                                  const ArithTables& tables) {
  check_alpha(alpha);
  check_n(n, tables);
  check_rational_n(n);
  const std::vector<mpq_class> pw = rational_powers(1 - alpha, 2 * std::size_t{n} + 1);
  mpq_class total = 0;
  for (std::uint32_t d1 = 2; d1 <= n; ++d1) {
    for (std::uint32_t d2 = 2; d2 <= n; ++d2) {
      const std::uint32_t lcm = d1 / std::gcd(d1, d2) * d2;
      const std::uint32_t j1 = n / d1;
      const std::uint32_t j2 = n / d2;
      const std::uint32_t j3 = n / lcm;
      total += tables.phi(d1) * tables.phi(d2) * (pw[j1 + j2 - j3] - pw[j1 + j2]);
    }
  }
  total.canonicalize();
  return total;
}

double variance_upper_envelope(std::uint64_t n, double alpha) {
  const double nn = static_cast<double>(n);
  return alpha * nn * nn * nn;
}

// ---------------------------------------------------------------------------
// C1(a1, a2)
//
// Writing d_i = c_i e_i with c_i = gcd(a_i, d_i), the c_i sums are finite and
// give phi(a1) phi(a2) / (a1 a2). What remains is a sum over squarefree e_i
// coprime to a_i, truncated at [e1, e2] <= T. Splitting e = gcd(e1, e2),
// e_i = e f_i, each squarefree m = e f1 f2 <= T collects a multiplicative
// weight: per prime p | m, 1/p^3 (p in e, p coprime to a1 a2) minus 1/p^2 for
// each side f_i with p coprime to a_i.

struct C1Evaluator::Impl {
  explicit Impl(std::uint32_t t) : cutoff(t), tables(t) {}

  double coprime_sum(std::uint64_t rad1, std::uint64_t rad2) const {
    const auto key = std::minmax(rad1, rad2);
    {
      std::lock_guard lock(mutex);
      if (auto it = memo.find(key); it != memo.end()) return it->second;
    }
    std::vector<double> weight(std::size_t{cutoff} + 1, 0.0);
    weight[1] = 1.0;
    Kahan acc;
    acc.add(1.0);
    for (std::uint32_t m = 2; m <= cutoff; ++m) {
      if (tables.mobius(m) == 0) continue;
      const std::uint32_t p = tables.spf(m);
      const double inv = 1.0 / p;
      double w;
      if (rad1 % p == 0 || rad2 % p == 0) {
        w = -inv * inv;
      } else {
        w = inv * inv * (inv - 2.0);
      }
      weight[m] = weight[m / p] * w;
      acc.add(weight[m]);
    }
    const double value = acc.value();
    std::lock_guard lock(mutex);
    memo.emplace(key, value);
    return value;
  }

  std::uint32_t cutoff;
  ArithTables tables;
  mutable std::mutex mutex;
  mutable std::map<std::pair<std::uint64_t, std::uint64_t>, double> memo;
};

C1Evaluator::C1Evaluator(std::uint32_t cutoff) {
  if (cutoff == 0) throw std::invalid_argument("c1_cutoff: must be positive");
  impl_ = new Impl(cutoff);
}

C1Evaluator::~C1Evaluator() { delete impl_; }

std::uint32_t C1Evaluator::cutoff() const noexcept { return impl_->cutoff; }

C1Value C1Evaluator::operator()(std::uint32_t a1, std::uint32_t a2) const {
  if (a1 == 0 || a2 == 0) throw std::invalid_argument("c1_constant: a1, a2 must be positive");
  if (std::gcd(a1, a2) != 1) throw std::invalid_argument("c1_constant: a1, a2 must be coprime");
  const double series = impl_->coprime_sum(radical_of(a1), radical_of(a2));
  const double scale = static_cast<double>(totient(a1)) * static_cast<double>(totient(a2)) / 3.0;
  // Dropped part bounded by the lcm-tail sum: about zeta(3) (log T + 2) / T.
  const double t = impl_->cutoff;
  const double sigma = static_cast<double>(divisor_sigma(a1)) * static_cast<double>(divisor_sigma(a2));
  const double tail = sigma / 3.0 * 1.2020569031595942 * (std::log(t) + 2.0) / t;
  return {scale * series, tail};
}

C1Value c1_constant(std::uint32_t a1, std::uint32_t a2, const TruncationConfig& config) {
  config.validate();
  static std::mutex registry_mutex;
  static std::map<std::uint32_t, std::unique_ptr<C1Evaluator>> registry;
  const C1Evaluator* evaluator;
  {
    std::lock_guard lock(registry_mutex);
    auto& slot = registry[config.c1_cutoff];
    if (!slot) slot = std::make_unique<C1Evaluator>(config.c1_cutoff);
    evaluator = slot.get();
  }
  return (*evaluator)(a1, a2);
}

// ---------------------------------------------------------------------------
// v(alpha)

RhoBounds rho_bounds(std::uint64_t a1, std::uint64_t a2, std::uint64_t j1, std::uint64_t j2,
                     std::uint64_t j3) {
  if (!a1 || !a2 || !j1 || !j2 || !j3) {
    throw std::invalid_argument("rho_bounds: all arguments must be positive");
  }
  RhoBounds r;
  r.lower_den = std::min({a1 * (j1 + 1), a2 * (j2 + 1), a1 * a2 * (j3 + 1)});
  r.upper_den = std::max({a1 * j1, a2 * j2, a1 * a2 * j3});
  r.rho1 = 1.0 / static_cast<double>(r.lower_den);
  r.rho2 = 1.0 / static_cast<double>(r.upper_den);
  return r;
}

namespace detail {

std::uint32_t kept_exponent_limit(double beta, double tol) {
  if (beta <= 0.0) return 0;
  std::uint32_t e = 0;
  while (pow_by_squaring(beta, e + 1) >= tol) ++e;
  return e;
}

}  // namespace detail

namespace {

// Bound on sum over a1, a2 of (a1 a2 / 3)(rho2^3 - rho1^3) for one (j1, j2, j3) is
// A(j1) A(j2) / (3 j1 j2 j3), with A(j) bounding sum 1/a over the a-interval.
double interval_weight(double j, double j3) {
  return std::min(1.0, (j3 + 1.0) / j) * ((j + j3 + 1.0) / (j3 * (j3 + 1.0)) + 1.0);
}

// Upper bound for the part of the v(alpha) series outside the kept index set.
double series_tail_bound(double beta, std::uint64_t emax, std::uint64_t j3_max) {
  const double alpha = 1.0 - beta;
  const std::uint64_t kept_j3 = std::min(j3_max, emax);
  const auto span = static_cast<std::uint64_t>(std::ceil(75.0 / -std::log(beta))) + 2;
  Kahan total;
  for (std::uint64_t j3 = 1;; ++j3) {
    const double b3 = pow_by_squaring(beta, j3);
    const double front = (1.0 - b3) * b3 / (3.0 * static_cast<double>(j3));
    if (j3 > kept_j3) {
      // Whole (j1, j2) plane dropped; stop once the crude bound is negligible.
      const double crude = front * 9.0 / (static_cast<double>(j3 * j3) * alpha * alpha);
      if (crude < 1e-22) {
        total.add(crude / alpha);
        break;
      }
    }
    const std::uint64_t jcap = emax + j3 + span;
    // suffix[i] = sum over j >= j3 + i of beta^(j - j3) A(j) / j, with geometric remainder.
    const std::size_t len = jcap - j3 + 2;
    std::vector<double> suffix(len, 0.0);
    suffix[len - 1] = pow_by_squaring(beta, jcap + 1 - j3) / alpha * 3.0 / static_cast<double>(jcap + 1);
    for (std::uint64_t j = jcap; j >= j3; --j) {
      const double jd = static_cast<double>(j);
      suffix[j - j3] = suffix[j - j3 + 1] +
                       pow_by_squaring(beta, j - j3) * interval_weight(jd, static_cast<double>(j3)) / jd;
      if (j == j3) break;
    }
    double plane;
    if (j3 > kept_j3) {
      plane = suffix[0] * suffix[0];
    } else {
      // Dropped: j1 + j2 - j3 > emax.
      Kahan acc;
      for (std::uint64_t j1 = j3; j1 <= jcap; ++j1) {
        const std::uint64_t need = emax + j3 + 1;
        const std::uint64_t j2_min = j1 >= need ? j3 : std::max(j3, need - j1);
        const double g1 = suffix[j1 - j3] - suffix[j1 - j3 + 1];
        acc.add(g1 * suffix[j2_min - j3]);
      }
      acc.add(suffix[jcap + 1 - j3] * suffix[0]);
      plane = acc.value();
    }
    total.add(front * plane);
  }
  return total.value();
}

}  // namespace

VAlphaResult v_alpha(double alpha, const TruncationConfig& config, const C1Evaluator& c1,
                     unsigned threads) {
  config.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha: v is defined on (0, 1)");
  const double beta = 1.0 - alpha;
  const std::uint32_t emax = detail::kept_exponent_limit(beta, config.beta_tail_tol);
  const std::vector<double> pw = beta_powers(beta, std::size_t{emax} + 2);

  // First pass: distinct C1 arguments, evaluated in parallel (memoized inside c1).
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<std::uint64_t, std::uint64_t>> pairs;
  for_each_series_member(alpha, config,
                         [&](std::uint64_t a1, std::uint64_t a2, std::uint64_t, std::uint64_t,
                             std::uint64_t, const RhoBounds&) {
                           pairs.try_emplace(std::minmax(radical_of(a1), radical_of(a2)), a1, a2);
                         });
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pair_list;
  pair_list.reserve(pairs.size());
  for (const auto& [key, rep] : pairs) pair_list.push_back(rep);
  parallel_for(pair_list.size(), threads, [&](std::size_t i, unsigned) {
    c1(static_cast<std::uint32_t>(pair_list[i].first), static_cast<std::uint32_t>(pair_list[i].second));
  });

  VAlphaResult result;
  result.c1_pairs = pair_list.size();
  Kahan value;
  Kahan c1_error;
  for_each_series_member(
      alpha, config,
      [&](std::uint64_t a1, std::uint64_t a2, std::uint64_t j1, std::uint64_t j2, std::uint64_t j3,
          const RhoBounds& rho) {
        const C1Value c = c1(static_cast<std::uint32_t>(a1), static_cast<std::uint32_t>(a2));
        // rho2^3 - rho1^3 = (rho2 - rho1)(rho2^2 + rho1 rho2 + rho1^2), with the
        // difference formed from the exact integer gap.
        const double lo = static_cast<double>(rho.lower_den);
        const double hi = static_cast<double>(rho.upper_den);
        const double gap = static_cast<double>(rho.lower_den - rho.upper_den) / (lo * hi);
        const double cube_gap =
            gap * (rho.rho2 * rho.rho2 + rho.rho1 * rho.rho2 + rho.rho1 * rho.rho1);
        const double weight = pw[j1 + j2 - j3] * (1.0 - pw[j3]);
        value.add(weight * c.value * cube_gap);
        c1_error.add(weight * c.tail_error * cube_gap);
        ++result.terms;
      });
  result.value = value.value();
  result.error_estimate = c1_error.value() + series_tail_bound(beta, emax, config.j3_max);
  return result;
}

VAlphaResult v_alpha(double alpha, const TruncationConfig& config, unsigned threads) {
  config.validate();
  const C1Evaluator c1(config.c1_cutoff);
  return v_alpha(alpha, config, c1, threads);
}

}  // namespace qlcm
