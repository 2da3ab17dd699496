#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ipag/tensor.hpp"

namespace ipag {

/// Reverse-mode tape over Matrix values. Parameters are bound by pointer and
/// their gradients are added into caller-owned matrices by backward().
class Tape {
 public:
  using Var = std::size_t;
  using Index = std::vector<std::uint32_t>;

  Var constant(Matrix value);
  /// Binds `value` without copying. With no `grad` the leaf is read only.
  Var parameter(const Matrix& value, Matrix* grad = nullptr);

  /// Valid until the next op is recorded.
  const Matrix& value(Var v) const;

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  /// a plus a 1 x cols row repeated on every row.
  Var add_row(Var a, Var row);
  Var relu(Var a);
  Var concat_cols(Var a, Var b);
  Var concat_rows(const std::vector<Var>& parts);
  Var gather_rows(Var a, Index rows);
  /// out[target[i]] += x[i], out has `rows` rows.
  Var scatter_sum(Var x, Index target, std::size_t rows);
  Var scale_rows(Var a, std::vector<double> factors);
  /// base with rows[i] replaced by values[i]; rows must be distinct.
  Var replace_rows(Var base, Index rows, Var values);
  /// Softmax down a single column.
  Var softmax_col(Var a);
  /// sum_i w[i] * x[i], a 1 x cols row.
  Var weighted_sum_rows(Var x, Var w);
  /// Binary cross-entropy of sigmoid(logit) against `label`, overflow safe.
  Var bce_with_logits(Var logit, double label);

  /// Seeds d out / d out = 1 for a 1x1 output and runs the tape backwards.
  void backward(Var out);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* bound = nullptr;
    Matrix* bound_grad = nullptr;
    Matrix grad;
    std::function<void(Tape&, Var)> back;
  };

  Var push(Matrix value, std::function<void(Tape&, Var)> back);
  Matrix& grad(Var v);

  std::vector<Node> nodes_;
};

double sigmoid(double x);

}  // namespace ipag
