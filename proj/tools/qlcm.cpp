// qlcm: command-line front end for the moment, simulation and benchmark runs.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "qlcm/harness.hpp"
#include "qlcm/simd.hpp"

extern char** environ;

namespace {

using qlcm::harness::Command;

struct Options {
  std::map<std::string, std::string> cli;
  std::string config;
  bool flag_exact = false;
  bool flag_enumerate = false;
  bool flag_timings = false;
};

void add_value(CLI::App* app, Options& o, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      "--" + key, [&o, key](const std::string& v) { o.cli[key] = v; }, help);
}

void add_common(CLI::App* app, Options& o) {
  add_value(app, o, "seed", "64-bit seed");
  add_value(app, o, "threads", "worker threads");
  add_value(app, o, "format", "json-lines or csv");
  add_value(app, o, "j3-max", "v(alpha) series: largest j3");
  add_value(app, o, "tail-tol", "v(alpha) series: smallest kept beta power");
  add_value(app, o, "c1-cutoff", "C1 series cutoff on the lcm");
  add_value(app, o, "dilog-tol", "dilogarithm tolerance");
  app->add_flag("--timings", o.flag_timings, "append per-phase wall times");
  app->add_option("--config", o.config, "flat key = value settings file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degree of the lcm of random q-analog sets: moments, simulation, checks"};
  app.require_subcommand(1);
  Options o;

  struct Sub {
    Command command;
    CLI::App* app;
  };
  std::vector<Sub> subs;
  auto sub = [&](Command c, const std::string& help) {
    CLI::App* s = app.add_subcommand(qlcm::harness::command_name(c), help);
    add_common(s, o);
    subs.push_back({c, s});
    return s;
  };

  CLI::App* expect = sub(Command::expect, "exact and asymptotic E[X] on an (n, alpha) grid");
  add_value(expect, o, "n", "n or a:b:step");
  add_value(expect, o, "alpha", "comma list of decimals or p/q");
  expect->add_flag("--exact", o.flag_exact, "also report the exact rational value (n <= 30)");
  expect->add_flag("--enumerate", o.flag_enumerate, "also enumerate all 2^n subsets (n <= 22)");

  CLI::App* variance = sub(Command::variance, "exact V[X] and the alpha n^3 envelope");
  add_value(variance, o, "n", "n or a:b:step");
  add_value(variance, o, "alpha", "comma list of decimals or p/q");
  add_value(variance, o, "variance-limit", "largest n accepted by the exact sum");
  variance->add_flag("--exact", o.flag_exact, "also report the exact rational value (n <= 30)");
  variance->add_flag("--enumerate", o.flag_enumerate, "also enumerate all 2^n subsets (n <= 22)");

  CLI::App* simulate = sub(Command::simulate, "Monte Carlo summary of X");
  add_value(simulate, o, "n", "n or a:b:step");
  add_value(simulate, o, "alpha", "comma list of decimals or p/q");
  add_value(simulate, o, "trials", "number of trials");
  add_value(simulate, o, "epsilon", "relative band for the concentration fraction");

  CLI::App* vfun = sub(Command::vfun, "limiting variance constant v(alpha)");
  add_value(vfun, o, "alpha", "comma list in (0, 1)");

  CLI::App* oracle = sub(Command::oracle_check, "degree statistic against polynomial lcm oracles");
  add_value(oracle, o, "n", "n or a:b:step (default 40)");
  add_value(oracle, o, "alpha", "sampling probability (default 1/2)");
  add_value(oracle, o, "trials", "number of random subsets");

  CLI::App* bench = sub(Command::bench, "timing suites");
  add_value(bench, o, "suite", "sieve, variance-sum, valpha or oracle");
  add_value(bench, o, "n", "sizes (suite default when absent)");
  add_value(bench, o, "alpha", "alpha values for valpha");
  add_value(bench, o, "trials", "subsets per oracle run");
  add_value(bench, o, "repeats", "runs per size; the median is reported");
  add_value(bench, o, "bench-timeout", "seconds");
  add_value(bench, o, "variance-limit", "largest n accepted by the exact sum");

  CLI::App* c1 = sub(Command::c1, "constant C1(a1, a2)");
  add_value(c1, o, "pairs", "comma list of a1:a2");

  app.add_flag_callback("--isa-info", [] {
    for (auto isa : qlcm::simd::available_isas()) std::cout << qlcm::simd::isa_name(isa) << '\n';
    std::cout << "active: " << qlcm::simd::isa_name(qlcm::simd::active().isa) << '\n';
    std::exit(0);
  }, "list available kernel sets and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qlcm::harness::kExitInvalidSpec;
  }

  if (o.flag_exact) o.cli["exact"] = "true";
  if (o.flag_enumerate) o.cli["enumerate"] = "true";
  if (o.flag_timings) o.cli["timings"] = "true";

  Command command = Command::expect;
  for (const Sub& s : subs) {
    if (s.app->parsed()) command = s.command;
  }

  try {
    qlcm::harness::Settings settings;
    settings.env = qlcm::harness::env_settings(environ);
    std::string config = o.config;
    if (config.empty()) {
      if (const char* path = std::getenv("QLCM_CONFIG")) config = path;
    }
    if (!config.empty()) settings.file = qlcm::harness::load_config_file(config);
    settings.cli = o.cli;
    const auto spec = qlcm::harness::build_spec(command, settings);
    return qlcm::harness::execute(spec, std::cout, std::cerr);
  } catch (const qlcm::harness::SpecError& e) {
    std::cerr << "invalid spec: " << e.what() << '\n';
    return qlcm::harness::kExitInvalidSpec;
  }
}
