#pragma once

#include <cstdint>

namespace qlcm {

// Counter-based generator: every random word is a pure function of
// (seed, trial_index, element), so trials can run in any order on any thread.

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer (a bijection on 64-bit words).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Per-trial stream key.
constexpr std::uint64_t trial_key(std::uint64_t seed, std::uint64_t trial_index) noexcept {
  return mix64(seed ^ mix64(trial_index * kGoldenGamma + 0x632BE59BD9B4E019ull));
}

/// Random word attached to element k of a trial.
constexpr std::uint64_t element_word(std::uint64_t key, std::uint64_t k) noexcept {
  return mix64(key + k * kGoldenGamma);
}

/// Element k is included iff (element_word >> 11) < threshold, so the
/// inclusion probability is threshold / 2^53. alpha = 1 maps to 2^53 (always),
/// alpha = 0 to 0 (never). Throws std::invalid_argument outside [0, 1].
std::uint64_t bernoulli_threshold(double alpha);

}  // namespace qlcm
