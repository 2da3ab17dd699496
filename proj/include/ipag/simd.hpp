#pragma once

#include <cstddef>
#include <string_view>

namespace ipag::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);
/// Compiled in and supported by this CPU.
bool available(Isa isa);
/// Best available set, unless IPAG_SIMD names another available one.
Isa default_isa();
Isa active_isa();
/// Throws std::invalid_argument when `isa` is not available.
void set_active_isa(Isa isa);

struct Kernels {
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const Kernels& kernels(Isa isa);
const Kernels& active();

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

}  // namespace ipag::simd
