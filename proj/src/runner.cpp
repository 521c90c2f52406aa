#include <chrono>
#include <cmath>
#include <memory>

#include "qlcm/errors.hpp"
#include "qlcm/harness.hpp"
#include "qlcm/model.hpp"
#include "qlcm/parallel.hpp"
#include "qlcm/qpoly.hpp"

namespace qlcm::harness {

namespace {

// Largest table the runner will sieve (about 37 bytes per entry).
constexpr std::uint32_t kTableLimit = 50'000'000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class F>
auto timed(std::vector<std::pair<std::string, double>>& timings, const char* phase, F&& f) {
  const auto start = Clock::now();
  if constexpr (std::is_void_v<decltype(f())>) {
    f();
    timings.emplace_back(phase, seconds_since(start));
  } else {
    auto result = f();
    timings.emplace_back(phase, seconds_since(start));
    return result;
  }
}

ReportRecord base_record(const ExperimentSpec& spec) {
  ReportRecord r;
  r.command = command_name(spec.command);
  r.seed = spec.seed;
  r.truncation = spec.truncation;
  return r;
}

struct GridPoint {
  std::uint32_t n;
  const AlphaValue* alpha;
};

std::vector<GridPoint> grid(const ExperimentSpec& spec) {
  std::vector<GridPoint> points;
  for (std::uint32_t n : spec.n) {
    for (const auto& a : spec.alpha) points.push_back({n, &a});
  }
  return points;
}

std::uint32_t max_n(const ExperimentSpec& spec) {
  std::uint32_t m = 1;
  for (std::uint32_t n : spec.n) m = std::max(m, n);
  return m;
}

ArithTables tables_for(std::uint32_t n) {
  if (n > kTableLimit) {
    throw ResourceLimitError("n = " + std::to_string(n) + " exceeds the table limit " +
                             std::to_string(kTableLimit));
  }
  return build_tables(n);
}

void check_variance_limit(const ExperimentSpec& spec) {
  for (std::uint32_t n : spec.n) {
    if (n > spec.variance_limit) {
      throw ResourceLimitError("variance: n = " + std::to_string(n) +
                               " exceeds the exact-sum limit " +
                               std::to_string(spec.variance_limit) +
                               " (raise with --variance-limit)");
    }
  }
}

void check_enumeration_limit(const ExperimentSpec& spec) {
  if (!spec.enumerate) return;
  for (std::uint32_t n : spec.n) {
    if (n > kEnumerationLimit) {
      throw ResourceLimitError("enumerate: n = " + std::to_string(n) + " exceeds " +
                               std::to_string(kEnumerationLimit));
    }
  }
}

void add_enumeration(MomentReport& m, const ExperimentSpec& spec, const GridPoint& p,
                     const ArithTables& tables) {
  if (!spec.enumerate) return;
  const ExactDistribution d = enumerate_exact(p.n, p.alpha->exact, tables);
  m.enumerated_mean = d.mean.get_str();
  m.enumerated_variance = d.variance.get_str();
}

/// Spreads the grid over workers when it has several points, otherwise hands
/// the threads to the point itself. Results land in grid order either way.
template <class Point>
std::vector<ReportRecord> run_grid(const ExperimentSpec& spec, const std::vector<Point>& points,
                                   const std::function<ReportRecord(const Point&, unsigned)>& one) {
  std::vector<ReportRecord> out(points.size());
  const unsigned inner = points.size() > 1 ? 1u : spec.threads;
  parallel_for(points.size(), points.size() > 1 ? spec.threads : 1u,
               [&](std::size_t i, unsigned) { out[i] = one(points[i], inner); });
  return out;
}

std::vector<ReportRecord> run_moments(const ExperimentSpec& spec) {
  const bool variance = spec.command == Command::variance;
  if (variance) check_variance_limit(spec);
  check_enumeration_limit(spec);
  std::vector<std::pair<std::string, double>> setup;
  const ArithTables tables = timed(setup, "tables", [&] { return tables_for(max_n(spec)); });
  auto records = run_grid<GridPoint>(spec, grid(spec), [&](const GridPoint& p, unsigned threads) {
    ReportRecord r = base_record(spec);
    r.n = p.n;
    r.alpha = p.alpha->text;
    r.alpha_value = p.alpha->value;
    MomentReport m;
    const double a = p.alpha->value;
    m.expectation_exact = timed(r.timings, "expectation", [&] {
      return expectation_exact(p.n, a, tables);
    });
    m.expectation_asymptotic = expectation_asymptotic(p.n, a);
    m.expectation_gap = *m.expectation_exact - *m.expectation_asymptotic;
    if (spec.exact) {
      m.expectation_exact_rational = expectation_exact_rational(p.n, p.alpha->exact, tables).get_str();
    }
    if (variance) {
      m.variance_exact = timed(r.timings, "variance", [&] {
        return variance_exact(p.n, a, tables, threads, spec.variance_limit);
      });
      m.variance_upper = variance_upper_envelope(p.n, a);
      if (spec.exact) {
        m.variance_exact_rational = variance_exact_rational(p.n, p.alpha->exact, tables).get_str();
      }
    }
    add_enumeration(m, spec, p, tables);
    r.moments = std::move(m);
    return r;
  });
  if (!records.empty()) records.front().timings.insert(records.front().timings.begin(), setup.begin(), setup.end());
  return records;
}

std::vector<ReportRecord> run_simulate(const ExperimentSpec& spec) {
  const ArithTables tables = tables_for(max_n(spec));
  std::vector<ReportRecord> out;
  // Trials are the parallel axis here, so grid points run in order.
  for (const GridPoint& p : grid(spec)) {
    ReportRecord r = base_record(spec);
    r.n = p.n;
    r.alpha = p.alpha->text;
    r.alpha_value = p.alpha->value;
    const double a = p.alpha->value;
    MomentReport m;
    m.expectation_exact = timed(r.timings, "expectation", [&] {
      return expectation_exact(p.n, a, tables);
    });
    m.expectation_asymptotic = expectation_asymptotic(p.n, a);
    m.expectation_gap = *m.expectation_exact - *m.expectation_asymptotic;
    const ModelParams params{p.n, a, spec.seed, spec.trials};
    const MonteCarloResult mc = timed(r.timings, "monte_carlo", [&] {
      return monte_carlo(params, tables, spec.threads);
    });
    MonteCarloBlock block;
    block.trials = mc.summary.trials;
    block.mean = mc.summary.mean;
    block.variance = mc.summary.variance;
    block.std_error = mc.summary.std_error;
    block.min_degree = mc.summary.min_degree;
    block.max_degree = mc.summary.max_degree;
    block.epsilon = spec.epsilon;
    const double e = *m.expectation_exact;
    std::uint64_t far = 0;
    for (std::uint64_t x : mc.degrees) far += std::fabs(static_cast<double>(x) - e) > spec.epsilon * e;
    block.concentration_fraction = static_cast<double>(far) / static_cast<double>(mc.degrees.size());
    r.moments = std::move(m);
    r.monte_carlo = block;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ReportRecord> run_vfun(const ExperimentSpec& spec) {
  C1Evaluator c1(spec.truncation.c1_cutoff);
  std::vector<ReportRecord> out;
  for (const AlphaValue& a : spec.alpha) {
    ReportRecord r = base_record(spec);
    r.alpha = a.text;
    r.alpha_value = a.value;
    const VAlphaResult v = timed(r.timings, "v_alpha", [&] {
      return v_alpha(a.value, spec.truncation, c1, spec.threads);
    });
    MomentReport m;
    m.v_alpha = v.value;
    m.v_alpha_error = v.error_estimate;
    m.v_alpha_terms = v.terms;
    r.moments = std::move(m);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ReportRecord> run_oracle_check(const ExperimentSpec& spec) {
  for (std::uint32_t n : spec.n) {
    if (n > kOracleLimit) {
      throw ResourceLimitError("oracle-check: n = " + std::to_string(n) + " exceeds " +
                               std::to_string(kOracleLimit));
    }
  }
  const ArithTables tables = build_tables(max_n(spec));
  std::vector<ReportRecord> out;
  for (const GridPoint& p : grid(spec)) {
    ReportRecord r = base_record(spec);
    r.n = p.n;
    r.alpha = p.alpha->text;
    r.alpha_value = p.alpha->value;
    const ModelParams params{p.n, p.alpha->value, spec.seed, spec.trials};
    std::vector<std::uint8_t> agree(spec.trials, 0);
    timed(r.timings, "oracle", [&] {
      parallel_for(spec.trials, spec.threads, [&](std::size_t i, unsigned) {
        const Subset s = sample_set(params, i);
        const auto elems = s.elements();
        const std::uint64_t x = degree_statistic(s, tables);
        agree[i] = x == lcm_degree_oracle(elems) && x == lcm_degree_oracle_gcd(elems);
      });
    });
    OracleBlock block;
    block.trials = spec.trials;
    for (auto ok : agree) block.agreements += ok;
    r.oracle = block;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ReportRecord> run_c1(const ExperimentSpec& spec) {
  C1Evaluator c1(spec.truncation.c1_cutoff);
  std::vector<ReportRecord> out;
  for (auto [a1, a2] : spec.c1_pairs) {
    ReportRecord r = base_record(spec);
    const C1Value v = timed(r.timings, "c1", [&] { return c1(a1, a2); });
    r.c1 = C1Block{a1, a2, v.value, v.tail_error};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<ReportRecord> run(const ExperimentSpec& spec) {
  spec.validate();
  switch (spec.command) {
    case Command::expect:
    case Command::variance: return run_moments(spec);
    case Command::simulate: return run_simulate(spec);
    case Command::vfun: return run_vfun(spec);
    case Command::oracle_check: return run_oracle_check(spec);
    case Command::c1: return run_c1(spec);
    case Command::bench: return {run_bench(spec)};
  }
  return {};
}

int execute(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    const auto records = run(spec);
    emit(records, spec.format, spec.timings, out);
    return kExitOk;
  } catch (const SpecError& e) {
    err << "invalid spec: " << e.what() << '\n';
    return kExitInvalidSpec;
  } catch (const ResourceLimitError& e) {
    err << "resource refusal: " << e.what() << '\n';
    return kExitResourceRefusal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace qlcm::harness
