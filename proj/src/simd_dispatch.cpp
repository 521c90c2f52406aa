#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace qlcm::simd {

namespace {

const Kernels kScalarKernels{
    Isa::scalar,
    &detail::bernoulli_bits_scalar,
    &detail::covered_phi_sum_scalar,
    &detail::expectation_terms_scalar,
    &detail::variance_row_scalar,
};

const Kernels* initial_kernels() noexcept {
  if (const char* env = std::getenv("QLCM_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &kScalarKernels;
    if (want == "avx2") return &kernels_for(Isa::avx2);
  }
  return cpu_supports(Isa::avx2) ? &kernels_for(Isa::avx2) : &kScalarKernels;
}

std::atomic<const Kernels*>& active_slot() noexcept {
  static std::atomic<const Kernels*> slot{initial_kernels()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const Kernels& scalar_kernels() noexcept { return kScalarKernels; }

const Kernels* avx2_kernels() noexcept {
#if defined(QLCM_HAVE_AVX2)
  return &detail::kAvx2Kernels;
#else
  return nullptr;
#endif
}

bool cpu_supports(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(QLCM_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::scalar};
  if (cpu_supports(Isa::avx2)) out.push_back(Isa::avx2);
  return out;
}

const Kernels& kernels_for(Isa isa) noexcept {
  if (isa == Isa::avx2 && cpu_supports(Isa::avx2)) return *avx2_kernels();
  return kScalarKernels;
}

const Kernels& active() noexcept { return *active_slot().load(std::memory_order_acquire); }

void set_active_isa(Isa isa) noexcept {
  active_slot().store(&kernels_for(isa), std::memory_order_release);
}

}  // namespace qlcm::simd
