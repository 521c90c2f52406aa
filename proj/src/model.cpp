#include "qlcm/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qlcm/errors.hpp"
#include "qlcm/parallel.hpp"
#include "qlcm/rng.hpp"
#include "qlcm/simd.hpp"

namespace qlcm {

Subset::Subset(std::uint32_t n) : n_(n), words_((std::size_t{n} + 63) / 64, 0) {}

Subset::Subset(std::uint32_t n, std::initializer_list<std::uint32_t> elements) : Subset(n) {
  for (std::uint32_t k : elements) insert(k);
}

Subset Subset::from_elements(std::uint32_t n, std::span<const std::uint32_t> elements) {
  Subset s(n);
  for (std::uint32_t k : elements) s.insert(k);
  return s;
}

Subset Subset::full(std::uint32_t n) {
  Subset s(n);
  for (std::uint32_t k = 1; k <= n; ++k) s.insert(k);
  return s;
}

void Subset::insert(std::uint32_t k) {
  if (k < 1 || k > n_) {
    throw std::out_of_range("Subset::insert: " + std::to_string(k) + " not in 1.." +
                            std::to_string(n_));
  }
  words_[(k - 1) >> 6] |= std::uint64_t{1} << ((k - 1) & 63);
}

std::uint32_t Subset::size() const noexcept {
  std::uint32_t total = 0;
  for (std::uint64_t w : words_) total += static_cast<std::uint32_t>(std::popcount(w));
  return total;
}

std::vector<std::uint32_t> Subset::elements() const {
  std::vector<std::uint32_t> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits) {
      out.push_back(static_cast<std::uint32_t>(w * 64 + std::countr_zero(bits) + 1));
      bits &= bits - 1;
    }
  }
  return out;
}

bool Subset::is_subset_of(const Subset& other) const {
  const std::size_t common = std::min(words_.size(), other.words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    const std::uint64_t theirs = i < common ? other.words_[i] : 0;
    if (words_[i] & ~theirs) return false;
  }
  return true;
}

void ModelParams::validate() const {
  if (n < 1) throw std::invalid_argument("n: must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha: must lie in [0, 1]");
  if (trials < 1) throw std::invalid_argument("trials: must be at least 1");
}

namespace {

void fill_sample(const ModelParams& params, std::uint64_t trial_index, Subset& out) {
  simd::active().bernoulli_bits(trial_key(params.seed, trial_index),
                                bernoulli_threshold(params.alpha), params.n,
                                out.words().data());
}

void check_tables(const ArithTables& tables, std::uint32_t n) {
  if (tables.limit() < n) {
    throw std::out_of_range("arith tables cover 1.." + std::to_string(tables.limit()) +
                            " but n = " + std::to_string(n));
  }
}

}  // namespace

Subset sample_set(const ModelParams& params, std::uint64_t trial_index) {
  params.validate();
  if (trial_index >= params.trials) {
    throw std::out_of_range("sample_set: trial_index beyond params.trials");
  }
  Subset s(params.n);
  fill_sample(params, trial_index, s);
  return s;
}

bool indicator(const Subset& set, std::uint32_t d) {
  if (d == 0) throw std::invalid_argument("indicator: d must be positive");
  if (d > set.n()) throw std::out_of_range("indicator: d exceeds n");
  for (std::uint32_t m = d; m <= set.n(); m += d) {
    if (set.contains(m)) return true;
  }
  return false;
}

std::uint64_t degree_statistic(const Subset& set, const ArithTables& tables,
                               DegreeWorkspace& workspace) {
  const std::uint32_t n = set.n();
  check_tables(tables, n);
  if (n < 2) return 0;
  auto& covered = workspace.covered(n);
  for (std::uint32_t d = 2; d <= n; ++d) {
    for (std::uint32_t m = d; m <= n; m += d) {
      if (set.contains(m)) {
        covered[d] = 1;
        break;
      }
    }
  }
  return simd::active().covered_phi_sum(tables.phi_array().data(), covered.data(), 2, n + 1);
}

std::uint64_t degree_statistic(const Subset& set, const ArithTables& tables) {
  DegreeWorkspace workspace;
  return degree_statistic(set, tables, workspace);
}

ExactDistribution enumerate_exact(std::uint32_t n, const mpq_class& alpha,
                                  const ArithTables& tables) {
  if (n == 0) throw std::invalid_argument("n: must be at least 1");
  if (n > kEnumerationLimit) {
    throw ResourceLimitError("enumerate_exact: n = " + std::to_string(n) +
                             " exceeds the enumeration limit " +
                             std::to_string(kEnumerationLimit));
  }
  if (alpha < 0 || alpha > 1) throw std::invalid_argument("alpha: must lie in [0, 1]");
  check_tables(tables, n);

  // divisor_mask[k]: bit d set for each d > 1 dividing k.
  std::vector<std::uint32_t> divisor_mask(n + 1, 0);
  for (std::uint32_t k = 1; k <= n; ++k) {
    for (std::uint32_t d = 2; d <= k; ++d) {
      if (k % d == 0) divisor_mask[k] |= std::uint32_t{1} << d;
    }
  }
  const std::uint64_t max_degree = tables.phi_prefix()[n] - 1;
  // counts[x * (n+1) + |A|] = number of sets with X = x and that size.
  std::vector<std::uint64_t> counts((max_degree + 1) * (n + 1), 0);
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::vector<std::uint32_t> cover(subsets, 0);
  for (std::uint64_t s = 0; s < subsets; ++s) {
    if (s != 0) {
      const auto low = static_cast<std::uint32_t>(std::countr_zero(s));
      cover[s] = cover[s & (s - 1)] | divisor_mask[low + 1];
    }
    std::uint64_t x = 0;
    for (std::uint32_t bits = cover[s]; bits; bits &= bits - 1) {
      x += tables.phi(static_cast<std::uint32_t>(std::countr_zero(bits)));
    }
    ++counts[x * (n + 1) + static_cast<std::uint64_t>(std::popcount(s))];
  }

  const mpq_class beta = 1 - alpha;
  std::vector<mpq_class> weight(n + 1);  // alpha^s * beta^(n-s)
  for (std::uint32_t s = 0; s <= n; ++s) {
    mpq_class a = 1;
    mpq_class b = 1;
    for (std::uint32_t i = 0; i < s; ++i) a *= alpha;
    for (std::uint32_t i = s; i < n; ++i) b *= beta;
    weight[s] = a * b;
  }

  ExactDistribution dist;
  dist.n = n;
  dist.alpha = alpha;
  mpq_class second = 0;
  for (std::uint64_t x = 0; x <= max_degree; ++x) {
    mpq_class p = 0;
    bool any = false;
    for (std::uint32_t s = 0; s <= n; ++s) {
      const std::uint64_t c = counts[x * (n + 1) + s];
      if (c == 0) continue;
      any = true;
      p += mpq_class(mpz_class(static_cast<unsigned long>(c))) * weight[s];
    }
    if (!any || p == 0) continue;
    p.canonicalize();
    const mpq_class xq(mpz_class(static_cast<unsigned long>(x)));
    dist.mean += xq * p;
    second += xq * xq * p;
    dist.pmf.emplace(x, p);
  }
  dist.variance = second - dist.mean * dist.mean;
  dist.mean.canonicalize();
  dist.variance.canonicalize();
  return dist;
}

McSummary summarize(std::span<const std::uint64_t> degrees) {
  McSummary out;
  out.trials = degrees.size();
  if (degrees.empty()) return out;
  unsigned __int128 s1 = 0;
  unsigned __int128 s2 = 0;
  out.min_degree = degrees.front();
  out.max_degree = degrees.front();
  for (std::uint64_t x : degrees) {
    s1 += x;
    s2 += static_cast<unsigned __int128>(x) * x;
    out.min_degree = std::min(out.min_degree, x);
    out.max_degree = std::max(out.max_degree, x);
  }
  const auto t = static_cast<unsigned __int128>(degrees.size());
  out.mean = static_cast<double>(static_cast<long double>(s1) / static_cast<long double>(t));
  if (degrees.size() > 1) {
    // t*s2 - s1^2 >= 0 by Cauchy-Schwarz, computed exactly.
    const unsigned __int128 num = t * s2 - s1 * s1;
    out.variance = static_cast<double>(static_cast<long double>(num) /
                                       static_cast<long double>(t * (t - 1)));
  }
  out.std_error = std::sqrt(out.variance / static_cast<double>(degrees.size()));
  return out;
}

MonteCarloResult monte_carlo(const ModelParams& params, const ArithTables& tables,
                             unsigned threads) {
  params.validate();
  check_tables(tables, params.n);
  MonteCarloResult result;
  result.degrees.assign(params.trials, 0);
  const unsigned workers = effective_workers(params.trials, threads);
  std::vector<Subset> sets(workers, Subset(params.n));
  std::vector<DegreeWorkspace> scratch(workers);
  parallel_for(params.trials, workers, [&](std::size_t trial, unsigned w) {
    fill_sample(params, trial, sets[w]);
    result.degrees[trial] = degree_statistic(sets[w], tables, scratch[w]);
  });
  result.summary = summarize(result.degrees);
  return result;
}

void for_each_sample(const ModelParams& params, const ArithTables& tables,
                     const std::function<void(std::uint64_t, const SampleResult&)>& visit) {
  params.validate();
  check_tables(tables, params.n);
  DegreeWorkspace scratch;
  for (std::uint64_t trial = 0; trial < params.trials; ++trial) {
    SampleResult r{Subset(params.n), 0};
    fill_sample(params, trial, r.subset);
    r.degree = degree_statistic(r.subset, tables, scratch);
    visit(trial, r);
  }
}

}  // namespace qlcm
