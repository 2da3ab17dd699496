#include "ipag/tensor.hpp"

#include <cmath>
#include <string>

#include "ipag/simd.hpp"

namespace ipag {

namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows) + "x" + std::to_string(m.cols); }

[[noreturn]] void mismatch(const char* op, const Matrix& a, const Matrix& b, const Matrix& c) {
  throw ShapeError(std::string(op) + ": " + shape(a) + ", " + shape(b) + " -> " + shape(c));
}

}  // namespace

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols) mismatch("gemm_nn", a, b, c);
  const auto& k = simd::active();
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t p = 0; p < a.cols; ++p) {
      const double v = a(i, p);
      if (v != 0.0) k.axpy(v, b.row(p), c.row(i), b.cols);
    }
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows) mismatch("gemm_nt", a, b, c);
  const auto& k = simd::active();
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.rows; ++j) c(i, j) += k.dot(a.row(i), b.row(j), a.cols);
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols) mismatch("gemm_tn", a, b, c);
  const auto& k = simd::active();
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t p = 0; p < a.cols; ++p) {
      const double v = a(i, p);
      if (v != 0.0) k.axpy(v, b.row(i), c.row(p), b.cols);
    }
}

bool all_finite(const Matrix& m) {
  for (double v : m.data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace ipag
