#include "pqlip/errors.hpp"
#include "pqlip/kernels.hpp"

#include <cstdlib>
#include <string>

namespace pqlip::kernels {

#ifndef PQLIP_HAVE_AVX2
const KernelSet& avx2_kernels() { throw PreconditionError("AVX2 kernels were not compiled into this build"); }
#endif

bool avx2_available() {
#if defined(PQLIP_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

const KernelSet& by_name(std::string_view name) {
  if (name == "scalar") return scalar_kernels();
  if (name == "avx2") {
    if (!avx2_available()) throw PreconditionError("AVX2 kernels requested but unavailable on this CPU");
    return avx2_kernels();
  }
  if (name == "auto" || name.empty()) return avx2_available() ? avx2_kernels() : scalar_kernels();
  throw PreconditionError("unknown kernel set '" + std::string(name) + "'");
}

const KernelSet& active() {
  static const KernelSet& chosen = [] () -> const KernelSet& {
    const char* env = std::getenv("PQLIP_KERNELS");
    return by_name(env ? std::string_view(env) : std::string_view("auto"));
  }();
  return chosen;
}

std::vector<std::string_view> available() {
  std::vector<std::string_view> out{"scalar"};
  if (avx2_available()) out.emplace_back("avx2");
  return out;
}

} // namespace pqlip::kernels
