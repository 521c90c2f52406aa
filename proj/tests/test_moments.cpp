#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "fixtures/calibration.hpp"
#include "oracles.hpp"
#include "qlcm/errors.hpp"
#include "qlcm/model.hpp"
#include "qlcm/moments.hpp"

using namespace qlcm;

namespace {
const double kPi2 = std::numbers::pi * std::numbers::pi;

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }
}  // namespace

TEST_CASE("dilog") {
  CHECK(dilog(0.0) == 0.0);
  CHECK(std::fabs(dilog(1.0) - kPi2 / 6) < 1e-15);
  CHECK(std::fabs(dilog(0.5) - (kPi2 / 12 - std::log(2.0) * std::log(2.0) / 2)) < 1e-15);
  const double z = 0.3;
  CHECK(std::fabs(dilog(z) + dilog(1 - z) - (kPi2 / 6 - std::log(z) * std::log(1 - z))) < 1e-12);
  for (double x : {0.01, 0.1, 0.25, 0.5}) {
    CHECK(std::fabs(dilog(x) - oracle::dilog_series(x)) < 1e-14);
  }
  CHECK(std::fabs(dilog(0.9) - oracle::dilog_series(0.9, 400)) < 1e-14);
  CHECK_THROWS_AS(dilog(-0.1), std::domain_error);
  CHECK_THROWS_AS(dilog(1.1), std::domain_error);
}

TEST_CASE("alpha_factor") {
  CHECK(alpha_factor(1.0) == 1.0);
  CHECK(alpha_factor(0.0) == 0.0);
  CHECK(std::fabs(alpha_factor(1 - 1e-8) - 1) < 1e-6);
  CHECK(alpha_factor(0.5) == doctest::Approx(dilog(0.5)));
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double f = alpha_factor(i / 100.0);
    CHECK(f > prev);
    prev = f;
  }
}

TEST_CASE("beta_powers") {
  const auto pw = beta_powers(0.5, 11);
  REQUIRE(pw.size() == 11);
  CHECK(pw[0] == 1.0);
  CHECK(pw[10] == std::ldexp(1.0, -10));
  const auto zero = beta_powers(0.0, 3);
  CHECK(zero[0] == 1.0);
  CHECK(zero[1] == 0.0);
}

TEST_CASE("expectation examples") {
  const ArithTables t = build_tables(10000);
  CHECK(expectation_exact(2, 0.5, t) == 0.5);
  CHECK(expectation_exact(3, 1.0, t) == 3.0);
  CHECK(expectation_exact(50, 0.0, t) == 0.0);
  CHECK(expectation_grouped(2, 0.5, t) == 0.5);
  CHECK(expectation_exact_rational(2, mpq_class(1, 2), t) == mpq_class(1, 2));
  CHECK(expectation_grouped_rational(2, mpq_class(1, 2), t) == mpq_class(1, 2));
  for (std::uint32_t n : {1u, 5u, 77u, 1000u}) {
    CHECK(expectation_grouped(n, 1.0, t) == static_cast<double>(t.phi_prefix()[n] - 1));
  }
  CHECK(expectation_asymptotic(100, 1.0) == doctest::Approx(3039.6355).epsilon(1e-7));
  CHECK(expectation_asymptotic(100, 0.0) == 0.0);
  CHECK_THROWS_AS(expectation_exact_rational(31, mpq_class(1, 2), t), ResourceLimitError);
}

TEST_CASE("expectation exact and grouped forms coincide") {
  const ArithTables t = build_tables(10000);
  for (std::uint32_t n : {10u, 100u, 1000u, 10000u}) {
    for (double a : {0.05, 0.5, 0.95}) {
      CHECK(rel(expectation_grouped(n, a, t), expectation_exact(n, a, t)) < 1e-12);
    }
  }
  for (std::uint32_t n = 1; n <= 30; ++n) {
    for (const mpq_class& a : {mpq_class(1, 4), mpq_class(2, 3), mpq_class(9, 10)}) {
      REQUIRE(expectation_exact_rational(n, a, t) == expectation_grouped_rational(n, a, t));
    }
  }
}

TEST_CASE("expectation is monotone in n and bounded") {
  const ArithTables t = build_tables(600);
  for (double a : {0.1, 0.5, 0.9}) {
    double prev = 0.0;
    for (std::uint32_t n = 1; n <= 600; ++n) {
      const double e = expectation_exact(n, a, t);
      REQUIRE(e >= prev);
      REQUIRE(e <= static_cast<double>(t.phi_prefix()[n] - 1) + 1e-9);
      prev = e;
    }
  }
}

TEST_CASE("expectation asymptotic envelope") {
  const ArithTables t = build_tables(100000);
  for (std::uint32_t n : {100u, 1000u, 10000u, 100000u}) {
    for (double a : {0.1, 0.5, 0.9, 1.0}) {
      const double gap = std::fabs(expectation_exact(n, a, t) - expectation_asymptotic(n, a));
      const double ln = std::log(static_cast<double>(n));
      CHECK(gap <= fixtures::kExpectationK * a * n * ln * ln);
    }
  }
  CHECK(rel(expectation_exact(100000, 1.0, t), expectation_asymptotic(100000, 1.0)) < 1e-3);
}

TEST_CASE("variance examples") {
  const ArithTables t = build_tables(20000);
  CHECK(variance_exact(2, 0.5, t) == 0.25);
  CHECK(variance_exact_quadratic(2, 0.5, t) == 0.25);
  CHECK(variance_exact(500, 1.0, t) == 0.0);
  CHECK(variance_exact(500, 0.0, t) == 0.0);
  CHECK(variance_exact_rational(2, mpq_class(1, 2), t) == mpq_class(1, 4));
  CHECK(variance_upper_envelope(2, 0.5) == 4.0);
  CHECK(variance_upper_envelope(2, 0.0) == 0.0);
  CHECK_THROWS_AS(variance_exact(20001, 0.5, build_tables(20001)), ResourceLimitError);
  CHECK_THROWS_AS(variance_exact_quadratic(20001, 0.5, build_tables(20001)), ResourceLimitError);
  CHECK_NOTHROW(variance_exact(20001, 0.5, build_tables(20001), 1, 30000));
}

TEST_CASE("variance matches exhaustive enumeration for n <= 14") {
  const ArithTables t = build_tables(14);
  for (std::uint32_t n = 1; n <= 14; ++n) {
    for (const mpq_class& a : {mpq_class(1, 4), mpq_class(1, 3), mpq_class(1, 2), mpq_class(3, 4)}) {
      const ExactDistribution d = enumerate_exact(n, a, t);
      REQUIRE(variance_exact_rational(n, a, t) == d.variance);
      REQUIRE(expectation_exact_rational(n, a, t) == d.mean);
      const double ad = a.get_d();
      const double v = d.variance.get_d();
      const double e = d.mean.get_d();
      REQUIRE(std::fabs(variance_exact(n, ad, t) - v) <= 1e-12 * std::max(v, 1.0));
      REQUIRE(std::fabs(variance_exact_quadratic(n, ad, t) - v) <= 1e-12 * std::max(v, 1.0));
      REQUIRE(std::fabs(expectation_exact(n, ad, t) - e) <= 1e-12 * std::max(e, 1.0));
    }
  }
}

TEST_CASE("grouped and quadratic variance agree") {
  const ArithTables t = build_tables(5000);
  for (std::uint32_t n : {37u, 1000u, 5000u}) {
    for (double a : {0.1, 0.5, 0.9}) {
      CHECK(rel(variance_exact(n, a, t), variance_exact_quadratic(n, a, t)) < 1e-11);
    }
  }
  CHECK(variance_exact(5000, 0.3, t, 1) == variance_exact(5000, 0.3, t, 7));
  CHECK(variance_exact_quadratic(5000, 0.3, t, 1) == variance_exact_quadratic(5000, 0.3, t, 7));
}

TEST_CASE("variance envelope alpha n^3") {
  const ArithTables t = build_tables(2000);
  for (std::uint32_t n : {10u, 100u, 1000u, 2000u}) {
    for (int i = 1; i <= 9; ++i) {
      const double a = i / 10.0;
      const double v = variance_exact(n, a, t);
      CHECK(v >= 0.0);
      CHECK(v <= variance_upper_envelope(n, a));
    }
  }
}

TEST_CASE("C1 constant") {
  const TruncationConfig cfg;
  const C1Value one = c1_constant(1, 1, cfg);
  CHECK(std::fabs(one.value - fixtures::kC1OneOneEulerProduct) <= one.tail_error);
  CHECK(one.tail_error < 1e-3 * one.value);
  CHECK(rel(one.value, static_cast<double>(fixtures::kPhiSquareSum1e6) / 1e18) < 5e-4);

  for (auto [a1, a2] : {std::pair{1u, 2u}, {3u, 5u}, {4u, 9u}, {7u, 10u}}) {
    const C1Value c = c1_constant(a1, a2, cfg);
    CHECK(std::fabs(c.value - oracle::c1_euler_product(a1, a2, 200000)) <= c.tail_error);
    CHECK(c1_constant(a2, a1, cfg).value == doctest::Approx(c.value).epsilon(1e-14));
  }
  for (std::uint32_t a1 = 1; a1 <= 20; ++a1) {
    for (std::uint32_t a2 = 1; a2 <= 20; ++a2) {
      if (std::gcd(a1, a2) != 1) continue;
      const C1Value c = c1_constant(a1, a2, cfg);
      REQUIRE(c.value > 0.0);
      REQUIRE(c.value <= a1 * a2 / 3.0);
    }
  }
  CHECK_THROWS_AS(c1_constant(2, 4, cfg), std::invalid_argument);
  CHECK_THROWS_AS(c1_constant(0, 1, cfg), std::invalid_argument);
}

TEST_CASE("C1 pair envelope") {
  const ArithTables t = build_tables(100000);
  const double c = c1_constant(1, 1, TruncationConfig{}).value;
  for (std::uint64_t x = 100; x <= 100000; x = x * 3 / 2) {
    const double lx = std::log(static_cast<double>(x));
    const double dx = static_cast<double>(x);
    const double gap = std::fabs(c * dx * dx * dx - static_cast<double>(phi_pair_summatory(t, 1, 1, x)));
    REQUIRE(gap <= fixtures::kC1PairK * dx * dx * lx * lx);
  }
}

TEST_CASE("rho_bounds") {
  const RhoBounds r = rho_bounds(1, 1, 1, 1, 1);
  CHECK(r.rho1 == 0.5);
  CHECK(r.rho2 == 1.0);
  CHECK(r.member());
  const RhoBounds s = rho_bounds(2, 3, 3, 2, 1);
  CHECK(s.rho1 == 1.0 / 8);
  CHECK(s.rho2 == 1.0 / 6);
  CHECK(s.lower_den == 8);
  CHECK(s.upper_den == 6);
  for (std::uint64_t a1 = 1; a1 <= 5; ++a1)
    for (std::uint64_t a2 = 1; a2 <= 5; ++a2)
      for (std::uint64_t j1 = 1; j1 <= 6; ++j1)
        for (std::uint64_t j2 = 1; j2 <= 6; ++j2)
          for (std::uint64_t j3 = std::min(j1, j2) + 1; j3 <= 8; ++j3) {
            REQUIRE_FALSE(rho_bounds(a1, a2, j1, j2, j3).member());
          }
  CHECK_THROWS_AS(rho_bounds(0, 1, 1, 1, 1), std::invalid_argument);
}

TEST_CASE("TruncationConfig validation") {
  TruncationConfig c;
  CHECK_NOTHROW(c.validate());
  c.beta_tail_tol = 1e-2;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.j3_max = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.c1_cutoff = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("series members satisfy the index-set invariants") {
  TruncationConfig cfg;
  cfg.beta_tail_tol = 1e-6;
  std::uint64_t count = 0;
  for_each_series_member(0.5, cfg, [&](auto a1, auto a2, auto j1, auto j2, auto j3, const RhoBounds& r) {
    ++count;
    REQUIRE(std::min(j1, j2) >= j3);
    REQUIRE(std::gcd(a1, a2) == 1);
    REQUIRE(r.rho1 < r.rho2);
    REQUIRE(r.rho2 <= 1.0 / static_cast<double>(a1 * a2 * j3));
  });
  CHECK(count > 0);
}

TEST_CASE("v_alpha") {
  const TruncationConfig cfg;
  CHECK_THROWS_AS(v_alpha(0.0, cfg), std::domain_error);
  CHECK_THROWS_AS(v_alpha(1.0, cfg), std::domain_error);
  C1Evaluator c1(cfg.c1_cutoff);
  for (double a : {0.2, 0.5, 0.8}) {
    const VAlphaResult r = v_alpha(a, cfg, c1);
    CHECK(r.value > 0.0);
    CHECK(r.error_estimate < 1e-2 * r.value);
  }
  const VAlphaResult base = v_alpha(0.5, cfg, c1);
  TruncationConfig deeper = cfg;
  deeper.j3_max *= 2;
  deeper.beta_tail_tol /= 2;
  const VAlphaResult deep = v_alpha(0.5, deeper, c1);
  CHECK(std::fabs(deep.value - base.value) < base.error_estimate);
  CHECK(v_alpha(0.5, cfg, c1, 1).value == v_alpha(0.5, cfg, c1, 5).value);
}
