#include "qlcm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace qlcm {

std::uint64_t bernoulli_threshold(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("bernoulli_threshold: alpha must lie in [0, 1]");
  }
  return static_cast<std::uint64_t>(std::floor(std::ldexp(alpha, 53)));
}

}  // namespace qlcm
