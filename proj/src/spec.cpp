#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <regex>
#include <algorithm>
#include <cmath>

#include "qlcm/harness.hpp"

namespace qlcm::harness {

namespace {

constexpr std::size_t kMaxGridPoints = 1'000'000;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <class T>
T parse_unsigned(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw SpecError(field, "expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
    throw SpecError(field, "expected a real number, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& field, const std::string& text) {
  std::string t = trim(text);
  for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw SpecError(field, "expected a boolean, got '" + text + "'");
}

mpz_class pow10(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "n",         "alpha",   "seed",        "trials",   "threads",  "format",
      "exact",     "enumerate", "timings",   "epsilon",  "variance-limit",
      "j3-max",    "tail-tol", "c1-cutoff",  "dilog-tol", "suite",   "repeats",
      "bench-timeout", "pairs"};
  return keys;
}

bool is_known_key(const std::string& key) {
  const auto& keys = known_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

}  // namespace

std::string command_name(Command c) {
  switch (c) {
    case Command::expect: return "expect";
    case Command::variance: return "variance";
    case Command::simulate: return "simulate";
    case Command::vfun: return "vfun";
    case Command::oracle_check: return "oracle-check";
    case Command::bench: return "bench";
    case Command::c1: return "c1";
  }
  return "unknown";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::expect, Command::variance, Command::simulate, Command::vfun,
                    Command::oracle_check, Command::bench, Command::c1}) {
    if (command_name(c) == name) return c;
  }
  throw SpecError("command", "unknown command '" + name + "'");
}

AlphaValue parse_alpha(const std::string& text) {
  AlphaValue out;
  out.text = trim(text);
  const std::string& t = out.text;
  static const std::regex fraction(R"(^(\d+)/(\d+)$)");
  static const std::regex decimal(R"(^(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?$)");
  std::smatch m;
  if (std::regex_match(t, m, fraction)) {
    const mpz_class p(m[1].str(), 10);
    const mpz_class q(m[2].str(), 10);
    if (q == 0) throw SpecError("alpha", "zero denominator in '" + t + "'");
    out.exact = mpq_class(p, q);
    out.exact.canonicalize();
    const mpz_class exact53 = mpz_class(1) << 53;
    // Division of two exactly representable integers is correctly rounded.
    if (p <= exact53 && q <= exact53) {
      out.value = p.get_d() / q.get_d();
    } else {
      out.value = out.exact.get_d();
    }
  } else if (std::regex_match(t, m, decimal) && (m[1].length() + m[2].length()) > 0) {
    const std::string digits = m[1].str() + m[2].str();
    const long frac = static_cast<long>(m[2].length());
    long exponent = 0;
    if (m[3].matched) {
      const std::string e = m[3].str();
      const auto [ptr, ec] = std::from_chars(e.data() + (e[0] == '+'), e.data() + e.size(), exponent);
      if (ec != std::errc{} || ptr != e.data() + e.size() || exponent < -400 || exponent > 400) {
        throw SpecError("alpha", "exponent out of range in '" + t + "'");
      }
    }
    const long shift = exponent - frac;
    const mpz_class mant(digits, 10);
    out.exact = shift >= 0 ? mpq_class(mant * pow10(shift)) : mpq_class(mant, pow10(-shift));
    out.exact.canonicalize();
    out.value = std::strtod(t.c_str(), nullptr);
  } else {
    throw SpecError("alpha", "cannot parse '" + t + "' (use a decimal or p/q)");
  }
  if (out.exact < 0 || out.exact > 1) {
    throw SpecError("alpha", "value '" + t + "' outside [0, 1]");
  }
  return out;
}

std::vector<AlphaValue> parse_alpha_list(const std::string& text) {
  std::vector<AlphaValue> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_alpha(part));
  return out;
}

std::vector<std::uint32_t> parse_n_range(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() > 3) throw SpecError("n", "expected <int> or <a:b:step>, got '" + text + "'");
  std::vector<std::uint64_t> v;
  for (const auto& p : parts) v.push_back(parse_unsigned<std::uint64_t>("n", p));
  for (std::uint64_t x : v) {
    if (x > UINT32_MAX) throw SpecError("n", "value exceeds 2^32 - 1");
  }
  const std::uint64_t a = v[0];
  const std::uint64_t b = v.size() >= 2 ? v[1] : a;
  const std::uint64_t step = v.size() == 3 ? v[2] : 1;
  if (a == 0) throw SpecError("n", "must be positive");
  if (b < a) throw SpecError("n", "range endpoints out of order in '" + text + "'");
  if (step == 0) throw SpecError("n", "step must be positive");
  if ((b - a) / step + 1 > kMaxGridPoints) throw SpecError("n", "range has too many points");
  std::vector<std::uint32_t> out;
  for (std::uint64_t x = a; x <= b; x += step) out.push_back(static_cast<std::uint32_t>(x));
  return out;
}

void ExperimentSpec::validate() const {
  const bool needs_n = command == Command::expect || command == Command::variance ||
                       command == Command::simulate || command == Command::oracle_check;
  const bool needs_alpha = needs_n || command == Command::vfun;
  if (needs_n && n.empty()) throw SpecError("n", "required for " + command_name(command));
  for (std::uint32_t x : n) {
    if (x == 0) throw SpecError("n", "must be positive");
  }
  if (needs_alpha && alpha.empty()) throw SpecError("alpha", "required for " + command_name(command));
  for (const auto& a : alpha) {
    if (a.exact < 0 || a.exact > 1) throw SpecError("alpha", "value '" + a.text + "' outside [0, 1]");
    if (command == Command::vfun && (a.exact == 0 || a.exact == 1)) {
      throw SpecError("alpha", "vfun needs 0 < alpha < 1, got '" + a.text + "'");
    }
  }
  if (trials == 0) throw SpecError("trials", "must be positive");
  if (threads == 0 || threads > 1024) throw SpecError("threads", "must be in [1, 1024]");
  try {
    truncation.validate();
  } catch (const std::invalid_argument& e) {
    throw SpecError("truncation", e.what());
  }
  if (exact) {
    for (std::uint32_t x : n) {
      if (x > kRationalLimit) {
        throw SpecError("exact", "exact mode needs n <= " + std::to_string(kRationalLimit));
      }
    }
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw SpecError("epsilon", "must be in (0, 1)");
  if (variance_limit == 0) throw SpecError("variance-limit", "must be positive");
  if (command == Command::bench) {
    static const std::vector<std::string> suites{"sieve", "variance-sum", "valpha", "oracle"};
    if (std::find(suites.begin(), suites.end(), suite) == suites.end()) {
      throw SpecError("suite", "unknown suite '" + suite + "'");
    }
  }
  if (repeats == 0) throw SpecError("repeats", "must be positive");
  if (!(bench_timeout > 0.0)) throw SpecError("bench-timeout", "must be positive");
  if (command == Command::c1 && c1_pairs.empty()) throw SpecError("pairs", "required for c1");
  for (auto [a1, a2] : c1_pairs) {
    if (a1 == 0 || a2 == 0) throw SpecError("pairs", "entries must be positive");
    if (std::gcd(a1, a2) != 1) {
      throw SpecError("pairs", std::to_string(a1) + ":" + std::to_string(a2) + " is not coprime");
    }
  }
}

std::optional<std::string> Settings::get(const std::string& key) const {
  for (const auto* layer : {&cli, &env, &file}) {
    if (auto it = layer->find(key); it != layer->end()) return it->second;
  }
  return std::nullopt;
}

std::string normalize_key(std::string key) {
  key = trim(key);
  for (auto& c : key) {
    c = c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return key;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("config", "cannot open '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw SpecError("config", path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = normalize_key(line.substr(0, eq));
    if (!is_known_key(key)) {
      throw SpecError("config", path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> env_settings(char** environ_block) {
  std::map<std::string, std::string> out;
  if (environ_block == nullptr) return out;
  for (char** p = environ_block; *p != nullptr; ++p) {
    const std::string entry(*p);
    if (entry.rfind("QLCM_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = normalize_key(entry.substr(5, eq - 5));
    if (is_known_key(key)) out[key] = entry.substr(eq + 1);
  }
  return out;
}

ExperimentSpec build_spec(Command command, const Settings& settings) {
  ExperimentSpec spec;
  spec.command = command;
  auto get = [&](const char* key) { return settings.get(key); };

  if (auto v = get("n")) {
    spec.n = parse_n_range(*v);
  } else if (command == Command::oracle_check) {
    spec.n = {40};
  }
  if (auto v = get("alpha")) {
    spec.alpha = parse_alpha_list(*v);
  } else if (command == Command::oracle_check || command == Command::bench) {
    spec.alpha = {parse_alpha("1/2")};
  }
  if (auto v = get("seed")) spec.seed = parse_unsigned<std::uint64_t>("seed", *v);
  if (auto v = get("trials")) spec.trials = parse_unsigned<std::uint64_t>("trials", *v);
  if (auto v = get("threads")) spec.threads = parse_unsigned<unsigned>("threads", *v);
  if (auto v = get("format")) {
    const std::string f = trim(*v);
    if (f == "json-lines" || f == "jsonl" || f == "json") {
      spec.format = Format::json_lines;
    } else if (f == "csv") {
      spec.format = Format::csv;
    } else {
      throw SpecError("format", "expected json-lines or csv, got '" + f + "'");
    }
  }
  if (auto v = get("exact")) spec.exact = parse_bool("exact", *v);
  if (auto v = get("enumerate")) spec.enumerate = parse_bool("enumerate", *v);
  if (auto v = get("timings")) spec.timings = parse_bool("timings", *v);
  if (auto v = get("epsilon")) spec.epsilon = parse_real("epsilon", *v);
  if (auto v = get("variance-limit")) {
    spec.variance_limit = parse_unsigned<std::uint32_t>("variance-limit", *v);
  }
  if (auto v = get("j3-max")) spec.truncation.j3_max = parse_unsigned<std::uint32_t>("j3-max", *v);
  if (auto v = get("tail-tol")) spec.truncation.beta_tail_tol = parse_real("tail-tol", *v);
  if (auto v = get("c1-cutoff")) {
    spec.truncation.c1_cutoff = parse_unsigned<std::uint32_t>("c1-cutoff", *v);
  }
  if (auto v = get("dilog-tol")) spec.truncation.dilog_tol = parse_real("dilog-tol", *v);
  if (auto v = get("suite")) spec.suite = trim(*v);
  if (auto v = get("repeats")) spec.repeats = parse_unsigned<unsigned>("repeats", *v);
  if (auto v = get("bench-timeout")) spec.bench_timeout = parse_real("bench-timeout", *v);
  if (auto v = get("pairs")) {
    for (const auto& item : split(*v, ',')) {
      const auto ab = split(item, ':');
      if (ab.size() != 2) throw SpecError("pairs", "expected a1:a2, got '" + item + "'");
      spec.c1_pairs.emplace_back(parse_unsigned<std::uint32_t>("pairs", ab[0]),
                                 parse_unsigned<std::uint32_t>("pairs", ab[1]));
    }
  } else if (command == Command::c1) {
    spec.c1_pairs = {{1, 1}};
  }
  spec.validate();
  return spec;
}

}  // namespace qlcm::harness
