#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <vector>

#include "qlcm/arith.hpp"

namespace qlcm {

/// Subset of {1, ..., n} stored as a bitset; bit k-1 represents element k.
class Subset {
 public:
  explicit Subset(std::uint32_t n);
  Subset(std::uint32_t n, std::initializer_list<std::uint32_t> elements);
  static Subset from_elements(std::uint32_t n, std::span<const std::uint32_t> elements);
  static Subset full(std::uint32_t n);

  std::uint32_t n() const noexcept { return n_; }
  bool contains(std::uint32_t k) const noexcept {
    return k >= 1 && k <= n_ && ((words_[(k - 1) >> 6] >> ((k - 1) & 63)) & 1u);
  }
  /// Throws std::out_of_range unless 1 <= k <= n.
  void insert(std::uint32_t k);
  std::uint32_t size() const noexcept;
  bool empty() const noexcept { return size() == 0; }
  std::vector<std::uint32_t> elements() const;
  bool is_subset_of(const Subset& other) const;

  std::span<std::uint64_t> words() noexcept { return words_; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const Subset&, const Subset&) = default;

 private:
  std::uint32_t n_;
  std::vector<std::uint64_t> words_;
};

/// One B(n, alpha) experiment.
struct ModelParams {
  std::uint32_t n = 1;
  double alpha = 0.5;
  std::uint64_t seed = 0;
  std::uint64_t trials = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct SampleResult {
  Subset subset;
  std::uint64_t degree;
};

/// Trial `trial_index` of the experiment: a pure function of (seed, trial_index).
/// Throws std::out_of_range if trial_index >= params.trials.
Subset sample_set(const ModelParams& params, std::uint64_t trial_index);

/// 1 iff some multiple of d lies in the set. Throws std::invalid_argument for
/// d == 0 and std::out_of_range for d > n.
bool indicator(const Subset& set, std::uint32_t d);

/// Reusable scratch for degree_statistic.
class DegreeWorkspace {
 public:
  std::vector<std::uint8_t>& covered(std::uint32_t n) {
    covered_.assign(std::size_t{n} + 1, 0);
    return covered_;
  }

 private:
  std::vector<std::uint8_t> covered_;
};

/// X(A) = sum over 1 < d <= n of phi(d) * I_A(d), by scanning multiples of d.
/// Throws std::out_of_range when the tables stop below n.
std::uint64_t degree_statistic(const Subset& set, const ArithTables& tables);
std::uint64_t degree_statistic(const Subset& set, const ArithTables& tables,
                               DegreeWorkspace& workspace);

/// Exact law of X under B(n, alpha) for rational alpha, by enumerating all 2^n sets.
struct ExactDistribution {
  std::uint32_t n = 0;
  mpq_class alpha;
  std::map<std::uint64_t, mpq_class> pmf;
  mpq_class mean;
  mpq_class variance;
};

inline constexpr std::uint32_t kEnumerationLimit = 22;

/// Throws qlcm::ResourceLimitError for n > kEnumerationLimit and
/// std::invalid_argument for alpha outside [0, 1] or n == 0.
ExactDistribution enumerate_exact(std::uint32_t n, const mpq_class& alpha,
                                  const ArithTables& tables);

/// Sample statistics of X over the trials. Variance uses the trials-1
/// denominator (0 for a single trial).
struct McSummary {
  std::uint64_t trials = 0;
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  std::uint64_t min_degree = 0;
  std::uint64_t max_degree = 0;
};

struct MonteCarloResult {
  std::vector<std::uint64_t> degrees;  // X of trial i at index i
  McSummary summary;
};

/// Runs every trial, on up to `threads` workers. Results are identical for any
/// thread count and kernel set.
MonteCarloResult monte_carlo(const ModelParams& params, const ArithTables& tables,
                             unsigned threads = 1);

/// Streams (trial_index, sample) in trial order on the calling thread.
void for_each_sample(const ModelParams& params, const ArithTables& tables,
                     const std::function<void(std::uint64_t, const SampleResult&)>& visit);

/// Summary statistics of an already computed series of degrees.
McSummary summarize(std::span<const std::uint64_t> degrees);

}  // namespace qlcm
