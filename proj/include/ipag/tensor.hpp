#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ipag {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool operator==(const Matrix&) const = default;
};

class ShapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// C += A * B
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);
/// C += A * B^T
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);
/// C += A^T * B
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);

bool all_finite(const Matrix& m);

}  // namespace ipag
