#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qlcm/moments.hpp"

namespace qlcm::harness {

enum class Command { expect, variance, simulate, vfun, oracle_check, bench, c1 };
enum class Format { json_lines, csv };

std::string command_name(Command c);
/// Throws SpecError for unknown names.
Command parse_command(const std::string& name);

/// Invalid experiment description; field() names the offending setting.
class SpecError : public std::invalid_argument {
 public:
  SpecError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// An alpha as written by the user, with its exact rational value.
struct AlphaValue {
  std::string text;
  mpq_class exact;
  double value = 0.0;
};

/// "0.25", "1e-3" or "1/3". Throws SpecError("alpha", ...).
AlphaValue parse_alpha(const std::string& text);
/// Comma-separated list of parse_alpha values.
std::vector<AlphaValue> parse_alpha_list(const std::string& text);
/// "100" or "a:b:step" (inclusive). Throws SpecError("n", ...).
std::vector<std::uint32_t> parse_n_range(const std::string& text);

struct ExperimentSpec {
  Command command = Command::expect;
  std::vector<std::uint32_t> n;
  std::vector<AlphaValue> alpha;
  std::uint64_t seed = 0;
  std::uint64_t trials = 1000;
  unsigned threads = 1;
  TruncationConfig truncation;
  Format format = Format::json_lines;
  bool exact = false;
  bool enumerate = false;
  bool timings = false;
  double epsilon = 0.05;
  std::uint32_t variance_limit = kQuadraticLimit;
  std::string suite = "sieve";
  unsigned repeats = 3;
  double bench_timeout = 60.0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> c1_pairs;

  /// Throws SpecError naming the first offending field.
  void validate() const;
};

/// Layered key = value settings. Lookup order: cli, env, file, then the
/// built-in default of the caller.
struct Settings {
  std::map<std::string, std::string> file;
  std::map<std::string, std::string> env;
  std::map<std::string, std::string> cli;

  std::optional<std::string> get(const std::string& key) const;
};

/// Keys are lower case with '-' separators; '_' in input is mapped to '-'.
std::string normalize_key(std::string key);
/// Flat "key = value" file; '#' starts a comment. Throws SpecError("config", ...).
std::map<std::string, std::string> load_config_file(const std::string& path);
/// QLCM_FOO_BAR=x becomes foo-bar = x. QLCM_CONFIG is skipped.
std::map<std::string, std::string> env_settings(char** environ_block);

ExperimentSpec build_spec(Command command, const Settings& settings);

struct MomentReport {
  std::optional<double> expectation_exact;
  std::optional<std::string> expectation_exact_rational;
  std::optional<double> expectation_asymptotic;
  std::optional<double> expectation_gap;
  std::optional<double> variance_exact;
  std::optional<std::string> variance_exact_rational;
  std::optional<double> variance_upper;
  std::optional<double> v_alpha;
  std::optional<double> v_alpha_error;
  std::optional<std::uint64_t> v_alpha_terms;
  std::optional<std::string> enumerated_mean;
  std::optional<std::string> enumerated_variance;

  friend bool operator==(const MomentReport&, const MomentReport&) = default;
};

struct MonteCarloBlock {
  std::uint64_t trials = 0;
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  std::uint64_t min_degree = 0;
  std::uint64_t max_degree = 0;
  double epsilon = 0.0;
  double concentration_fraction = 0.0;  // share of trials with |X - E| > epsilon E

  friend bool operator==(const MonteCarloBlock&, const MonteCarloBlock&) = default;
};

struct OracleBlock {
  std::uint64_t trials = 0;
  std::uint64_t agreements = 0;  // degree_statistic equals both polynomial paths

  friend bool operator==(const OracleBlock&, const OracleBlock&) = default;
};

struct C1Block {
  std::uint32_t a1 = 1;
  std::uint32_t a2 = 1;
  double value = 0.0;
  double tail_error = 0.0;

  friend bool operator==(const C1Block&, const C1Block&) = default;
};

struct BenchRow {
  std::string label;
  std::uint64_t size = 0;
  unsigned repeats = 0;
  double median_seconds = 0.0;

  friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

struct BenchBlock {
  std::string suite;
  std::vector<BenchRow> rows;
  std::optional<double> fitted_exponent;
  bool within_timeout = true;

  friend bool operator==(const BenchBlock&, const BenchBlock&) = default;
};

/// One output line. Absent optionals are omitted from json-lines.
struct ReportRecord {
  std::string command;
  std::uint64_t seed = 0;
  TruncationConfig truncation;
  std::optional<std::uint32_t> n;
  std::optional<std::string> alpha;
  std::optional<double> alpha_value;
  std::optional<MomentReport> moments;
  std::optional<MonteCarloBlock> monte_carlo;
  std::optional<OracleBlock> oracle;
  std::optional<C1Block> c1;
  std::optional<BenchBlock> bench;
  std::vector<std::pair<std::string, double>> timings;  // seconds per phase

  friend bool operator==(const ReportRecord& a, const ReportRecord& b);
};

/// Formats a double with 17 significant digits.
std::string format_double(double x);

/// Json-lines output. Key order: command, seed, truncation, n, alpha,
/// alpha_value, moments, monte_carlo, oracle, c1, bench, timings.
/// Timings are written only when with_timings is set.
std::string to_json_line(const ReportRecord& record, bool with_timings);

inline constexpr const char* kCsvHeader =
    "n,alpha,e_exact,e_asym,v_exact,v_upper,v_alpha,mc_mean,mc_var,seed";
std::string to_csv_row(const ReportRecord& record);

/// Serializes a whole stream; csv always starts with the header line.
void emit(const std::vector<ReportRecord>& records, Format format, bool with_timings,
          std::ostream& out);

/// Records in grid order (n outer, alpha inner). Deterministic for a given
/// spec, apart from timings. Throws ResourceLimitError on refusals.
std::vector<ReportRecord> run(const ExperimentSpec& spec);

/// Timing suites: sieve, variance-sum, valpha, oracle.
ReportRecord run_bench(const ExperimentSpec& spec);

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidSpec = 2;
inline constexpr int kExitResourceRefusal = 3;

/// validate + run + emit, mapping failures to exit codes with a message on err.
int execute(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace qlcm::harness
