#include <cmath>
#include <cstdio>
#include <tuple>

#include "qlcm/harness.hpp"

namespace qlcm::harness {

namespace {

class JsonWriter {
 public:
  void begin() { open('{'); }
  void end() {
    out_ += '}';
    first_ = false;
  }
  void object(const char* name) {
    key(name);
    open('{');
  }
  void array(const char* name) {
    key(name);
    open('[');
  }
  void end_array() {
    out_ += ']';
    first_ = false;
  }
  void element_object() {
    comma();
    open('{');
  }

  void field(const char* name, const std::string& v) {
    key(name);
    string(v);
  }
  void field(const char* name, double v) {
    key(name);
    out_ += std::isfinite(v) ? format_double(v) : "null";
  }
  void field(const char* name, std::uint64_t v) {
    key(name);
    out_ += std::to_string(v);
  }
  void field(const char* name, std::uint32_t v) { field(name, std::uint64_t{v}); }
  void field(const char* name, bool v) {
    key(name);
    out_ += v ? "true" : "false";
  }
  template <class T>
  void field(const char* name, const std::optional<T>& v) {
    if (v) field(name, *v);
  }

  std::string take() { return std::move(out_); }

 private:
  void open(char c) {
    out_ += c;
    first_ = true;
  }
  void comma() {
    if (!first_) out_ += ',';
    first_ = false;
  }
  void key(const char* name) {
    comma();
    string(name);
    out_ += ':';
  }
  void string(const std::string& s) {
    out_ += '"';
    for (unsigned char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\r': out_ += "\\r"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (c < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out_ += buf;
          } else {
            out_ += static_cast<char>(c);
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  bool first_ = true;
};

std::string csv_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

bool operator==(const ReportRecord& a, const ReportRecord& b) {
  const auto trunc = [](const TruncationConfig& t) {
    return std::tuple(t.c1_cutoff, t.j3_max, t.beta_tail_tol, t.dilog_tol);
  };
  return a.command == b.command && a.seed == b.seed && trunc(a.truncation) == trunc(b.truncation) &&
         a.n == b.n && a.alpha == b.alpha && a.alpha_value == b.alpha_value &&
         a.moments == b.moments && a.monte_carlo == b.monte_carlo && a.oracle == b.oracle &&
         a.c1 == b.c1 && a.bench == b.bench && a.timings == b.timings;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_json_line(const ReportRecord& r, bool with_timings) {
  JsonWriter w;
  w.begin();
  w.field("command", r.command);
  w.field("seed", r.seed);
  w.object("truncation");
  w.field("c1_cutoff", r.truncation.c1_cutoff);
  w.field("j3_max", r.truncation.j3_max);
  w.field("beta_tail_tol", r.truncation.beta_tail_tol);
  w.field("dilog_tol", r.truncation.dilog_tol);
  w.end();
  w.field("n", r.n);
  w.field("alpha", r.alpha);
  w.field("alpha_value", r.alpha_value);
  if (r.moments) {
    const MomentReport& m = *r.moments;
    w.object("moments");
    w.field("expectation_exact", m.expectation_exact);
    w.field("expectation_exact_rational", m.expectation_exact_rational);
    w.field("expectation_asymptotic", m.expectation_asymptotic);
    w.field("expectation_gap", m.expectation_gap);
    w.field("variance_exact", m.variance_exact);
    w.field("variance_exact_rational", m.variance_exact_rational);
    w.field("variance_upper", m.variance_upper);
    w.field("v_alpha", m.v_alpha);
    w.field("v_alpha_error", m.v_alpha_error);
    w.field("v_alpha_terms", m.v_alpha_terms);
    w.field("enumerated_mean", m.enumerated_mean);
    w.field("enumerated_variance", m.enumerated_variance);
    w.end();
  }
  if (r.monte_carlo) {
    const MonteCarloBlock& mc = *r.monte_carlo;
    w.object("monte_carlo");
    w.field("trials", mc.trials);
    w.field("mean", mc.mean);
    w.field("variance", mc.variance);
    w.field("std_error", mc.std_error);
    w.field("min_degree", mc.min_degree);
    w.field("max_degree", mc.max_degree);
    w.field("epsilon", mc.epsilon);
    w.field("concentration_fraction", mc.concentration_fraction);
    w.end();
  }
  if (r.oracle) {
    w.object("oracle");
    w.field("trials", r.oracle->trials);
    w.field("agreements", r.oracle->agreements);
    w.end();
  }
  if (r.c1) {
    w.object("c1");
    w.field("a1", r.c1->a1);
    w.field("a2", r.c1->a2);
    w.field("value", r.c1->value);
    w.field("tail_error", r.c1->tail_error);
    w.end();
  }
  if (r.bench) {
    const BenchBlock& b = *r.bench;
    w.object("bench");
    w.field("suite", b.suite);
    w.array("rows");
    for (const BenchRow& row : b.rows) {
      w.element_object();
      w.field("label", row.label);
      w.field("size", row.size);
      w.field("repeats", std::uint64_t{row.repeats});
      w.field("median_seconds", row.median_seconds);
      w.end();
    }
    w.end_array();
    w.field("fitted_exponent", b.fitted_exponent);
    w.field("within_timeout", b.within_timeout);
    w.end();
  }
  if (with_timings && !r.timings.empty()) {
    w.object("timings");
    for (const auto& [phase, seconds] : r.timings) w.field(phase.c_str(), seconds);
    w.end();
  }
  w.end();
  return w.take();
}

std::string to_csv_row(const ReportRecord& r) {
  const MomentReport none;
  const MomentReport& m = r.moments ? *r.moments : none;
  std::string row;
  row += r.n ? std::to_string(*r.n) : "";
  row += ',' + r.alpha.value_or("");
  row += ',' + csv_cell(m.expectation_exact);
  row += ',' + csv_cell(m.expectation_asymptotic);
  row += ',' + csv_cell(m.variance_exact);
  row += ',' + csv_cell(m.variance_upper);
  row += ',' + csv_cell(m.v_alpha);
  row += ',' + (r.monte_carlo ? format_double(r.monte_carlo->mean) : std::string());
  row += ',' + (r.monte_carlo ? format_double(r.monte_carlo->variance) : std::string());
  row += ',' + std::to_string(r.seed);
  return row;
}

void emit(const std::vector<ReportRecord>& records, Format format, bool with_timings,
          std::ostream& out) {
  if (format == Format::csv) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) out << to_csv_row(r) << '\n';
  } else {
    for (const auto& r : records) out << to_json_line(r, with_timings) << '\n';
  }
}

}  // namespace qlcm::harness
