#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qlcm/errors.hpp"
#include "qlcm/harness.hpp"

using namespace qlcm;
using namespace qlcm::harness;
using nlohmann::json;

namespace {

template <class T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<T>();
}

ReportRecord parse_record(const std::string& line) {
  const json j = json::parse(line);
  ReportRecord r;
  r.command = j.at("command").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  const json& t = j.at("truncation");
  r.truncation.c1_cutoff = t.at("c1_cutoff").get<std::uint32_t>();
  r.truncation.j3_max = t.at("j3_max").get<std::uint32_t>();
  r.truncation.beta_tail_tol = t.at("beta_tail_tol").get<double>();
  r.truncation.dilog_tol = t.at("dilog_tol").get<double>();
  r.n = opt<std::uint32_t>(j, "n");
  r.alpha = opt<std::string>(j, "alpha");
  r.alpha_value = opt<double>(j, "alpha_value");
  if (j.contains("moments")) {
    const json& m = j.at("moments");
    MomentReport mr;
    mr.expectation_exact = opt<double>(m, "expectation_exact");
    mr.expectation_exact_rational = opt<std::string>(m, "expectation_exact_rational");
    mr.expectation_asymptotic = opt<double>(m, "expectation_asymptotic");
    mr.expectation_gap = opt<double>(m, "expectation_gap");
    mr.variance_exact = opt<double>(m, "variance_exact");
    mr.variance_exact_rational = opt<std::string>(m, "variance_exact_rational");
    mr.variance_upper = opt<double>(m, "variance_upper");
    mr.v_alpha = opt<double>(m, "v_alpha");
    mr.v_alpha_error = opt<double>(m, "v_alpha_error");
    mr.v_alpha_terms = opt<std::uint64_t>(m, "v_alpha_terms");
    mr.enumerated_mean = opt<std::string>(m, "enumerated_mean");
    mr.enumerated_variance = opt<std::string>(m, "enumerated_variance");
    r.moments = mr;
  }
  if (j.contains("monte_carlo")) {
    const json& m = j.at("monte_carlo");
    r.monte_carlo = MonteCarloBlock{m.at("trials"),     m.at("mean"),       m.at("variance"),
                                    m.at("std_error"),  m.at("min_degree"), m.at("max_degree"),
                                    m.at("epsilon"),    m.at("concentration_fraction")};
  }
  if (j.contains("oracle")) {
    r.oracle = OracleBlock{j.at("oracle").at("trials"), j.at("oracle").at("agreements")};
  }
  if (j.contains("c1")) {
    const json& c = j.at("c1");
    r.c1 = C1Block{c.at("a1"), c.at("a2"), c.at("value"), c.at("tail_error")};
  }
  if (j.contains("bench")) {
    const json& b = j.at("bench");
    BenchBlock bb;
    bb.suite = b.at("suite");
    for (const json& row : b.at("rows")) {
      bb.rows.push_back({row.at("label"), row.at("size"), row.at("repeats"), row.at("median_seconds")});
    }
    bb.fitted_exponent = opt<double>(b, "fitted_exponent");
    bb.within_timeout = b.at("within_timeout");
    r.bench = bb;
  }
  if (j.contains("timings")) {
    for (const auto& [k, v] : j.at("timings").items()) r.timings.emplace_back(k, v.get<double>());
  }
  return r;
}

ExperimentSpec spec_from(Command c, std::map<std::string, std::string> cli) {
  Settings s;
  s.cli = std::move(cli);
  return build_spec(c, s);
}

std::string emit_string(const std::vector<ReportRecord>& rs, Format f, bool timings = false) {
  std::ostringstream out;
  emit(rs, f, timings, out);
  return out.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("parse_alpha") {
  const AlphaValue third = parse_alpha("1/3");
  CHECK(third.exact == mpq_class(1, 3));
  CHECK(third.value == 1.0 / 3.0);
  CHECK(third.text == "1/3");
  CHECK(parse_alpha("0.25").exact == mpq_class(1, 4));
  CHECK(parse_alpha("0.1").value == 0.1);
  CHECK(parse_alpha("0.1").exact == mpq_class(1, 10));
  CHECK(parse_alpha("1e-3").exact == mpq_class(1, 1000));
  CHECK(parse_alpha("1").exact == 1);
  CHECK(parse_alpha(" .5 ").exact == mpq_class(1, 2));
  CHECK(parse_alpha("2/4").exact == mpq_class(1, 2));
  for (const char* bad : {"", "abc", "1.5", "3/2", "1/0", "-0.1", "0.5.5", "."}) {
    CHECK_THROWS_WITH_AS(parse_alpha(bad), doctest::Contains("alpha"), SpecError);
  }
  const auto list = parse_alpha_list("0.1, 1/2,0.9");
  REQUIRE(list.size() == 3);
  CHECK(list[1].exact == mpq_class(1, 2));
}

TEST_CASE("parse_n_range") {
  CHECK(parse_n_range("100") == std::vector<std::uint32_t>{100});
  CHECK(parse_n_range("10:30:10") == std::vector<std::uint32_t>{10, 20, 30});
  CHECK(parse_n_range("10:25:10") == std::vector<std::uint32_t>{10, 20});
  CHECK(parse_n_range("3:5") == std::vector<std::uint32_t>{3, 4, 5});
  for (const char* bad : {"0", "5:3", "1:5:0", "x", "1:2:3:4", "-4", "99999999999", "1:4000000"}) {
    try {
      parse_n_range(bad);
      FAIL("accepted " << bad);
    } catch (const SpecError& e) {
      CHECK(e.field() == "n");
    }
  }
}

TEST_CASE("spec validation names the field") {
  const auto field_of = [](Command c, std::map<std::string, std::string> cli) {
    try {
      spec_from(c, std::move(cli));
    } catch (const SpecError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(Command::expect, {{"alpha", "0.5"}}) == "n");
  CHECK(field_of(Command::expect, {{"n", "10"}}) == "alpha");
  CHECK(field_of(Command::vfun, {{"alpha", "0"}}) == "alpha");
  CHECK(field_of(Command::simulate, {{"n", "10"}, {"alpha", "0.5"}, {"trials", "0"}}) == "trials");
  CHECK(field_of(Command::expect, {{"n", "31"}, {"alpha", "1/2"}, {"exact", "true"}}) == "exact");
  CHECK(field_of(Command::vfun, {{"alpha", "0.5"}, {"tail-tol", "0.5"}}) == "truncation");
  CHECK(field_of(Command::vfun, {{"alpha", "0.5"}, {"j3-max", "0"}}) == "truncation");
  CHECK(field_of(Command::bench, {{"suite", "nope"}}) == "suite");
  CHECK(field_of(Command::c1, {{"pairs", "2:4"}}) == "pairs");
  CHECK(field_of(Command::expect, {{"n", "10"}, {"alpha", "0.5"}, {"format", "xml"}}) == "format");
  CHECK(field_of(Command::expect, {{"n", "10"}, {"alpha", "0.5"}, {"seed", "-1"}}) == "seed");
  CHECK(field_of(Command::expect, {{"n", "10"}, {"alpha", "0.5"}, {"threads", "0"}}) == "threads");
  CHECK(field_of(Command::expect, {{"n", "10"}, {"alpha", "0.5"}}) == "<none>");
  CHECK_THROWS_AS(parse_command("frobnicate"), SpecError);
  CHECK(parse_command("oracle-check") == Command::oracle_check);
}

TEST_CASE("settings precedence: cli, env, file, defaults") {
  const std::string path = "qlcm_test_settings.conf";
  {
    std::ofstream f(path);
    f << "# sweep defaults\nseed = 11\ntrials=50\nj3_max = 12   # comment\nalpha = 0.25\n\n";
  }
  std::string env_seed = "QLCM_SEED=22";
  std::string env_trials = "QLCM_TRIALS=60";
  std::string env_other = "QLCM_ISA=scalar";
  std::string env_unrelated = "HOME=/root";
  char* environ_block[] = {env_seed.data(), env_trials.data(), env_other.data(),
                           env_unrelated.data(), nullptr};
  Settings s;
  s.file = load_config_file(path);
  s.env = env_settings(environ_block);
  s.cli = {{"seed", "33"}, {"n", "10"}};
  CHECK(s.env.size() == 2);

  ExperimentSpec spec = build_spec(Command::simulate, s);
  CHECK(spec.seed == 33);
  CHECK(spec.trials == 60);
  CHECK(spec.truncation.j3_max == 12);
  CHECK(spec.alpha.front().exact == mpq_class(1, 4));
  CHECK(spec.truncation.c1_cutoff == TruncationConfig{}.c1_cutoff);

  s.cli.erase("seed");
  CHECK(build_spec(Command::simulate, s).seed == 22);
  s.env.clear();
  CHECK(build_spec(Command::simulate, s).seed == 11);
  CHECK(build_spec(Command::simulate, s).trials == 50);

  {
    std::ofstream f(path);
    f << "sed = 1\n";
  }
  CHECK_THROWS_WITH_AS(load_config_file(path), doctest::Contains("unknown key"), SpecError);
  {
    std::ofstream f(path);
    f << "seed 1\n";
  }
  CHECK_THROWS_AS(load_config_file(path), SpecError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config_file(path), SpecError);
}

TEST_CASE("emit: json-lines round trip") {
  ReportRecord r;
  r.command = "simulate";
  r.seed = 18446744073709551615ull;
  r.truncation.beta_tail_tol = 1e-13;
  r.n = 123;
  r.alpha = "1/3";
  r.alpha_value = 1.0 / 3.0;
  MomentReport m;
  m.expectation_exact = 0.1 + 0.2;
  m.expectation_exact_rational = "13553/729";
  m.expectation_asymptotic = 1e300;
  m.expectation_gap = -5e-324;
  m.variance_exact = 3.0;
  m.v_alpha = 0.039829164382336;
  m.v_alpha_terms = 6939;
  r.moments = m;
  r.monte_carlo = MonteCarloBlock{2000, 12.5, 0.1, 1e-3, 1, 99, 0.05, 0.0125};
  r.oracle = OracleBlock{500, 499};
  r.c1 = C1Block{2, 3, 0.37374501037592905, 6.4e-4};
  r.bench = BenchBlock{"oracle\t\"x\"", {{"a", 40, 3, 0.25}, {"b", 80, 3, 1.5}}, 1.9, false};
  r.timings = {{"tables", 0.5}, {"variance", 1.25}};

  const std::string with = to_json_line(r, true);
  CHECK(with.find('\n') == std::string::npos);
  CHECK(parse_record(with) == r);

  const std::string without = to_json_line(r, false);
  CHECK(without.find("timings") == std::string::npos);
  ReportRecord no_timings = r;
  no_timings.timings.clear();
  CHECK(parse_record(without) == no_timings);

  // Fixed key order.
  const auto pos = [&](const char* k) { return with.find(std::string("\"") + k + "\""); };
  CHECK(pos("command") < pos("seed"));
  CHECK(pos("seed") < pos("truncation"));
  CHECK(pos("truncation") < pos("n"));
  CHECK(pos("alpha") < pos("moments"));
  CHECK(pos("moments") < pos("monte_carlo"));
  CHECK(pos("monte_carlo") < pos("oracle"));
  CHECK(pos("oracle") < pos("c1"));
  CHECK(pos("c1") < pos("bench"));
  CHECK(pos("bench") < pos("timings"));

  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");

  ReportRecord minimal;
  minimal.command = "c1";
  CHECK(parse_record(to_json_line(minimal, true)) == minimal);
}

TEST_CASE("emit: stream formats") {
  CHECK(emit_string({}, Format::json_lines).empty());
  CHECK(emit_string({}, Format::csv) == std::string(kCsvHeader) + "\n");
  CHECK(std::string(kCsvHeader) == "n,alpha,e_exact,e_asym,v_exact,v_upper,v_alpha,mc_mean,mc_var,seed");

  ReportRecord r;
  r.command = "variance";
  r.seed = 7;
  r.n = 2;
  r.alpha = "1/2";
  MomentReport m;
  m.expectation_exact = 0.5;
  m.expectation_asymptotic = 1.25;
  m.variance_exact = 0.25;
  m.variance_upper = 4.0;
  r.moments = m;
  const auto out = lines(emit_string({r, r}, Format::csv));
  REQUIRE(out.size() == 3);
  CHECK(out[1] == "2,1/2,0.5,1.25,0.25,4,,,,7");
  CHECK(lines(emit_string({r, r, r}, Format::json_lines)).size() == 3);
}

TEST_CASE("run: record contents") {
  const auto expect = run(spec_from(Command::expect, {{"n", "100"}, {"alpha", "0.5"}}));
  REQUIRE(expect.size() == 1);
  REQUIRE(expect[0].moments);
  const MomentReport& m = *expect[0].moments;
  REQUIRE(m.expectation_exact);
  REQUIRE(m.expectation_asymptotic);
  REQUIRE(m.expectation_gap);
  CHECK(*m.expectation_gap == *m.expectation_exact - *m.expectation_asymptotic);
  CHECK(expect[0].seed == 0);

  const auto grid = run(spec_from(Command::variance, {{"n", "2:12:5"}, {"alpha", "1/4,3/4"}, {"exact", "1"}}));
  REQUIRE(grid.size() == 6);
  CHECK(*grid[0].n == 2);
  CHECK(*grid[0].alpha == "1/4");
  CHECK(*grid[1].alpha == "3/4");
  CHECK(*grid[5].n == 12);
  CHECK(*grid[0].moments->variance_exact_rational == mpq_class(3, 16).get_str());

  const auto oracle = run(spec_from(Command::oracle_check, {{"n", "40"}, {"trials", "500"}}));
  REQUIRE(oracle.size() == 1);
  CHECK(oracle[0].oracle->trials == 500);
  CHECK(oracle[0].oracle->agreements == 500);

  const auto sim = run(spec_from(Command::simulate, {{"n", "300"}, {"alpha", "1"}, {"trials", "40"}, {"seed", "5"}}));
  REQUIRE(sim[0].monte_carlo);
  CHECK(sim[0].monte_carlo->variance == 0.0);
  CHECK(sim[0].monte_carlo->concentration_fraction == 0.0);
  CHECK(sim[0].seed == 5);

  const auto c1 = run(spec_from(Command::c1, {{"pairs", "1:1,3:4"}}));
  REQUIRE(c1.size() == 2);
  CHECK(c1[1].c1->a2 == 4);
}

TEST_CASE("execute: exit codes") {
  std::ostringstream out, err;
  CHECK(execute(spec_from(Command::expect, {{"n", "10"}, {"alpha", "0.5"}}), out, err) == kExitOk);

  ExperimentSpec bad = spec_from(Command::expect, {{"n", "10"}, {"alpha", "0.5"}});
  bad.trials = 0;
  CHECK(execute(bad, out, err) == kExitInvalidSpec);
  CHECK(err.str().find("trials") != std::string::npos);

  err.str("");
  const ExperimentSpec big = spec_from(Command::variance, {{"n", "20001"}, {"alpha", "0.5"}});
  CHECK(execute(big, out, err) == kExitResourceRefusal);
  CHECK(err.str().find("20000") != std::string::npos);
  CHECK_THROWS_AS(run(big), ResourceLimitError);

  const ExperimentSpec enumerate =
      spec_from(Command::expect, {{"n", "23"}, {"alpha", "0.5"}, {"enumerate", "yes"}});
  CHECK(execute(enumerate, out, err) == kExitResourceRefusal);
  const ExperimentSpec oracle = spec_from(Command::oracle_check, {{"n", "513"}});
  CHECK(execute(oracle, out, err) == kExitResourceRefusal);
}

TEST_CASE("bench suites") {
  const auto sieve = run(spec_from(Command::bench, {{"suite", "sieve"}, {"repeats", "1"}}));
  REQUIRE(sieve.size() == 1);
  REQUIRE(sieve[0].bench);
  CHECK(sieve[0].bench->rows.at(0).size == 1000000);
  CHECK(sieve[0].bench->rows.at(0).median_seconds > 0.0);

  const auto oracle = run(spec_from(Command::bench, {{"suite", "oracle"}, {"trials", "20"}, {"repeats", "1"}}));
  CHECK(oracle[0].bench->rows.at(0).size == 40);
  CHECK(oracle[0].bench->within_timeout);

  const auto valpha = run(spec_from(Command::bench, {{"suite", "valpha"}, {"repeats", "1"}, {"tail-tol", "1e-8"}}));
  CHECK(valpha[0].bench->rows.at(0).size > 0);

  const auto quad = run(spec_from(Command::bench, {{"suite", "variance-sum"}, {"repeats", "5"}}));
  REQUIRE(quad[0].bench->fitted_exponent);
  const double k = *quad[0].bench->fitted_exponent;
  MESSAGE("variance-sum fitted exponent " << k);
  CHECK(k >= 1.7);
  CHECK(k <= 2.3);
}
