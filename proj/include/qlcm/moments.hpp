#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <vector>

#include "qlcm/arith.hpp"

namespace qlcm {

/// Truncation levels for the C1 double series and the v(alpha) series.
struct TruncationConfig {
  std::uint32_t c1_cutoff = 100000;  // keep [d1', d2'] <= c1_cutoff
  std::uint32_t j3_max = 40;
  double beta_tail_tol = 1e-12;      // keep terms with beta^(j1+j2-j3) >= tol
  double dilog_tol = 1e-16;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Largest n accepted by the variance sums unless the caller raises it.
inline constexpr std::uint32_t kQuadraticLimit = 20000;
/// Largest n accepted by the exact-rational paths.
inline constexpr std::uint32_t kRationalLimit = 30;

/// Li2(z) = sum z^k / k^2 on [0, 1]: direct series for z <= 1/2, reflection
/// Li2(z) = pi^2/6 - ln z ln(1-z) - Li2(1-z) above. Throws std::domain_error
/// outside [0, 1].
double dilog(double z, double tol = 1e-16);

/// alpha * Li2(1 - alpha) / (1 - alpha), equal to 1 at alpha = 1 and 0 at 0.
double alpha_factor(double alpha);

/// beta^k for k in [0, count), each entry by exponentiation by squaring.
std::vector<double> beta_powers(double beta, std::size_t count);

/// E[X] = sum over 1 < d <= n of phi(d) (1 - beta^floor(n/d)).
double expectation_exact(std::uint32_t n, double alpha, const ArithTables& tables);
/// Exact rational E[X]; n <= kRationalLimit.
mpq_class expectation_exact_rational(std::uint32_t n, const mpq_class& alpha,
                                     const ArithTables& tables);

/// alpha * sum_{j <= n} beta^(j-1) Phi(n/j) - (1 - beta^n); equal to
/// expectation_exact before any asymptotic step.
double expectation_grouped(std::uint32_t n, double alpha, const ArithTables& tables);
mpq_class expectation_grouped_rational(std::uint32_t n, const mpq_class& alpha,
                                       const ArithTables& tables);

/// (3 / pi^2) * alpha_factor(alpha) * n^2.
double expectation_asymptotic(std::uint64_t n, double alpha);

/// V[X] as the double sum over 1 < d1, d2 <= n of
/// phi(d1) phi(d2) beta^(j1 + j2 - j3) (1 - beta^j3), j3 = floor(n / [d1, d2]).
/// Terms with [d1, d2] > n vanish, so only gcd classes g * a1 * a2 <= n are
/// visited. Throws qlcm::ResourceLimitError when n > limit.
double variance_exact(std::uint32_t n, double alpha, const ArithTables& tables,
                      unsigned threads = 1, std::uint32_t limit = kQuadraticLimit);

/// The same double sum visiting all n^2 pairs (SIMD row kernel).
double variance_exact_quadratic(std::uint32_t n, double alpha, const ArithTables& tables,
                                unsigned threads = 1, std::uint32_t limit = kQuadraticLimit);

/// Exact rational V[X]; n <= kRationalLimit.
mpq_class variance_exact_rational(std::uint32_t n, const mpq_class& alpha,
                                  const ArithTables& tables);

/// alpha * n^3.
double variance_upper_envelope(std::uint64_t n, double alpha);

struct C1Value {
  double value = 0.0;
  double tail_error = 0.0;  // estimate of the dropped part of the series
};

/// Evaluates the truncated C1(a1, a2) series for one cutoff, memoizing the
/// coprime-part sum by the radicals of (a1, a2). Thread-safe.
class C1Evaluator {
 public:
  explicit C1Evaluator(std::uint32_t cutoff);
  ~C1Evaluator();
  C1Evaluator(const C1Evaluator&) = delete;
  C1Evaluator& operator=(const C1Evaluator&) = delete;

  std::uint32_t cutoff() const noexcept;
  /// Throws std::invalid_argument unless a1, a2 >= 1 are coprime.
  C1Value operator()(std::uint32_t a1, std::uint32_t a2) const;

 private:
  struct Impl;
  Impl* impl_;
};

C1Value c1_constant(std::uint32_t a1, std::uint32_t a2, const TruncationConfig& config);

/// rho1 = 1/lower_den, rho2 = 1/upper_den. The pair contributes to the v(alpha)
/// series iff upper_den < lower_den (decided in integers).
struct RhoBounds {
  std::uint64_t lower_den = 0;  // min(a1 (j1+1), a2 (j2+1), a1 a2 (j3+1))
  std::uint64_t upper_den = 0;  // max(a1 j1, a2 j2, a1 a2 j3)
  double rho1 = 0.0;
  double rho2 = 0.0;
  bool member() const noexcept { return upper_den < lower_den; }
};

/// Throws std::invalid_argument if any argument is zero.
RhoBounds rho_bounds(std::uint64_t a1, std::uint64_t a2, std::uint64_t j1, std::uint64_t j2,
                     std::uint64_t j3);

struct VAlphaResult {
  double value = 0.0;
  double error_estimate = 0.0;  // series truncation plus C1 truncation
  std::uint64_t terms = 0;      // members of the index set visited
  std::uint64_t c1_pairs = 0;   // distinct C1 evaluations
};

/// Limit of V[X] / n^3. Throws std::domain_error unless 0 < alpha < 1.
VAlphaResult v_alpha(double alpha, const TruncationConfig& config, unsigned threads = 1);
VAlphaResult v_alpha(double alpha, const TruncationConfig& config, const C1Evaluator& c1,
                     unsigned threads = 1);

/// Visits every (a1, a2, j1, j2, j3) the v(alpha) series keeps, in summation order.
template <class Visit>
void for_each_series_member(double alpha, const TruncationConfig& config, Visit&& visit);

}  // namespace qlcm

#include "qlcm/detail/series_members.hpp"
