#include <algorithm>
#include <chrono>
#include <cmath>

#include "qlcm/errors.hpp"
#include "qlcm/harness.hpp"
#include "qlcm/model.hpp"
#include "qlcm/qpoly.hpp"

namespace qlcm::harness {

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double median_seconds(unsigned repeats, F&& f) {
  std::vector<double> times;
  for (unsigned i = 0; i < repeats; ++i) {
    const auto start = Clock::now();
    f();
    times.push_back(std::chrono::duration<double>(Clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  const std::size_t mid = times.size() / 2;
  return times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
}

/// Least-squares slope of log(seconds) against log(size).
std::optional<double> fitted_exponent(const std::vector<BenchRow>& rows) {
  if (rows.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    const double x = std::log(static_cast<double>(r.size));
    const double y = std::log(std::max(r.median_seconds, 1e-9));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(rows.size());
  const double denom = k * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (k * sxy - sx * sy) / denom;
}

std::vector<std::uint32_t> sizes_or(const ExperimentSpec& spec, std::vector<std::uint32_t> fallback) {
  return spec.n.empty() ? fallback : spec.n;
}

volatile double sink = 0.0;

}  // namespace

ReportRecord run_bench(const ExperimentSpec& spec) {
  ReportRecord r;
  r.command = command_name(Command::bench);
  r.seed = spec.seed;
  r.truncation = spec.truncation;
  BenchBlock b;
  b.suite = spec.suite;
  const auto start = Clock::now();

  if (spec.suite == "sieve") {
    for (std::uint32_t n : sizes_or(spec, {1'000'000})) {
      const double t = median_seconds(spec.repeats, [&] { sink = build_tables(n).phi_prefix()[n]; });
      b.rows.push_back({"build_tables", n, spec.repeats, t});
    }
  } else if (spec.suite == "variance-sum") {
    const auto sizes = sizes_or(spec, {2000, 4000, 8000});
    const std::uint32_t top = *std::max_element(sizes.begin(), sizes.end());
    if (top > spec.variance_limit) {
      throw ResourceLimitError("variance-sum: n = " + std::to_string(top) + " exceeds the limit " +
                               std::to_string(spec.variance_limit));
    }
    const ArithTables tables = build_tables(top);
    const double alpha = spec.alpha.empty() ? 0.5 : spec.alpha.front().value;
    for (std::uint32_t n : sizes) {
      const double t = median_seconds(spec.repeats, [&] {
        sink = variance_exact_quadratic(n, alpha, tables, 1, spec.variance_limit);
      });
      b.rows.push_back({"variance_exact_quadratic", n, spec.repeats, t});
    }
    b.fitted_exponent = fitted_exponent(b.rows);
  } else if (spec.suite == "valpha") {
    for (const AlphaValue& a : spec.alpha) {
      if (a.exact == 0 || a.exact == 1) throw SpecError("alpha", "valpha needs 0 < alpha < 1");
      std::uint64_t terms = 0;
      const double t = median_seconds(spec.repeats, [&] {
        C1Evaluator c1(spec.truncation.c1_cutoff);
        const VAlphaResult v = v_alpha(a.value, spec.truncation, c1, spec.threads);
        terms = v.terms;
        sink = v.value;
      });
      b.rows.push_back({"v_alpha " + a.text, terms, spec.repeats, t});
    }
  } else if (spec.suite == "oracle") {
    for (std::uint32_t n : sizes_or(spec, {40})) {
      if (n > kOracleLimit) {
        throw ResourceLimitError("oracle: n = " + std::to_string(n) + " exceeds " +
                                 std::to_string(kOracleLimit));
      }
      const ModelParams params{n, 0.5, spec.seed, spec.trials};
      const double t = median_seconds(spec.repeats, [&] {
        std::uint64_t total = 0;
        for (std::uint64_t i = 0; i < spec.trials; ++i) {
          const auto elems = sample_set(params, i).elements();
          total += lcm_degree_oracle(elems) + lcm_degree_oracle_gcd(elems);
        }
        sink = static_cast<double>(total);
      });
      b.rows.push_back({"lcm_degree_oracle x" + std::to_string(spec.trials), n, spec.repeats, t});
    }
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  b.within_timeout = elapsed <= spec.bench_timeout;
  r.timings.emplace_back("total", elapsed);
  r.bench = std::move(b);
  return r;
}

}  // namespace qlcm::harness
