#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and, when
// compiled in and supported by the CPU, an AVX2 variant. Floating-point sums
// are striped over kLanes compensated accumulators in both variants so the
// results are bit-identical whichever kernel runs.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace qlcm::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

inline constexpr std::size_t kLanes = 4;

/// kLanes Kahan accumulators; term i of a kernel range goes to lane i % kLanes.
struct LaneSums {
  std::array<double, kLanes> sum{};
  std::array<double, kLanes> comp{};

  void add(std::size_t lane, double x) noexcept {
    const double y = x - comp[lane];
    const double t = sum[lane] + y;
    comp[lane] = (t - sum[lane]) - y;
    sum[lane] = t;
  }

  /// Lanes folded in index order with compensation.
  double total() const noexcept {
    double s = 0.0;
    double c = 0.0;
    for (std::size_t l = 0; l < kLanes; ++l) {
      const double y = (sum[l] - comp[l]) - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    return s;
  }
};

/// One row d1 of the dense variance double sum. Off-diagonal terms only:
/// sum over d2 in [2, d1) of phi[d2] * (pw[j1 + j2 - j3] - pw[j1 + j2]) with
/// j2 = floor(n / d2), j3 = floor(n / lcm(d1, d2)), lcm = cofactor[d2] * d2.
struct VarianceRow {
  std::uint32_t n = 0;
  std::uint32_t d1 = 0;
  std::uint32_t j1 = 0;
  const std::uint32_t* cofactor = nullptr;  // d1 / gcd(d1, d2), indexed by d2
  const std::uint32_t* phi = nullptr;
  const std::uint32_t* jfloor = nullptr;    // floor(n / d)
  const double* pw = nullptr;               // beta^k for k in [0, 2n]
};

struct Kernels {
  Isa isa;

  /// Sets bit (k-1) of `words` iff element k in [1, n] is sampled; `words`
  /// must hold ceil(n/64) entries and is overwritten.
  void (*bernoulli_bits)(std::uint64_t key, std::uint64_t threshold, std::uint32_t n,
                         std::uint64_t* words);

  /// Sum of phi[d] over d in [lo, hi) with covered[d] != 0.
  std::uint64_t (*covered_phi_sum)(const std::uint32_t* phi, const std::uint8_t* covered,
                                   std::uint32_t lo, std::uint32_t hi);

  /// Adds phi[d] * one_minus[jfloor[d]] for d in [lo, hi) into acc (lane (d-lo) % 4).
  void (*expectation_terms)(const std::uint32_t* phi, const std::uint32_t* jfloor,
                            const double* one_minus, std::uint32_t lo, std::uint32_t hi,
                            LaneSums& acc);

  /// Adds the off-diagonal row terms into acc (lane (d2-2) % 4).
  void (*variance_row)(const VarianceRow& row, LaneSums& acc);
};

const Kernels& scalar_kernels() noexcept;
/// nullptr when the AVX2 variants were not compiled in.
const Kernels* avx2_kernels() noexcept;

bool cpu_supports(Isa isa) noexcept;
/// Kernel sets that are compiled in and runnable on this CPU.
std::vector<Isa> available_isas();
/// Falls back to scalar when `isa` is unavailable.
const Kernels& kernels_for(Isa isa) noexcept;

/// Best available set, unless QLCM_ISA=scalar|avx2 or set_active_isa says otherwise.
const Kernels& active() noexcept;
void set_active_isa(Isa isa) noexcept;

}  // namespace qlcm::simd
