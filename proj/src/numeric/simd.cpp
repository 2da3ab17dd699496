#include "ipag/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace ipag::simd {

#if defined(IPAG_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif
#if defined(IPAG_HAVE_NEON)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace neon
#endif

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace scalar

namespace {

const Kernels kScalar{scalar::dot, scalar::axpy};
#if defined(IPAG_HAVE_AVX2)
const Kernels kAvx2{avx2::dot, avx2::axpy};
#endif
#if defined(IPAG_HAVE_NEON)
const Kernels kNeon{neon::dot, neon::axpy};
#endif

Isa pick_default() {
  if (const char* env = std::getenv("IPAG_SIMD")) {
    const std::string v = env;
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && available(Isa::avx2)) return Isa::avx2;
    if (v == "neon" && available(Isa::neon)) return Isa::neon;
  }
  if (available(Isa::avx2)) return Isa::avx2;
  if (available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

std::atomic<const Kernels*>& current() {
  static std::atomic<const Kernels*> k{&kernels(default_isa())};
  return k;
}

std::atomic<Isa>& current_isa() {
  static std::atomic<Isa> isa{default_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "?";
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(IPAG_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(IPAG_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa default_isa() {
  static const Isa isa = pick_default();
  return isa;
}

const Kernels& kernels(Isa isa) {
  if (!available(isa)) throw std::invalid_argument("SIMD set " + std::string(to_string(isa)) + " unavailable");
  switch (isa) {
#if defined(IPAG_HAVE_AVX2)
    case Isa::avx2: return kAvx2;
#endif
#if defined(IPAG_HAVE_NEON)
    case Isa::neon: return kNeon;
#endif
    default: return kScalar;
  }
}

Isa active_isa() { return current_isa().load(); }

void set_active_isa(Isa isa) {
  current().store(&kernels(isa));
  current_isa().store(isa);
}

const Kernels& active() { return *current().load(); }

}  // namespace ipag::simd
