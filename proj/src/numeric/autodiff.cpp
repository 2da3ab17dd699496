#include "ipag/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ipag/simd.hpp"

namespace ipag {

namespace {

void require(bool ok, const char* op) {
  if (!ok) throw ShapeError(std::string("shape mismatch in ") + op);
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tape::Var Tape::push(Matrix value, std::function<void(Tape&, Var)> back) {
  nodes_.push_back({std::move(value), nullptr, nullptr, {}, std::move(back)});
  return nodes_.size() - 1;
}

Tape::Var Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Tape::Var Tape::parameter(const Matrix& value, Matrix* grad) {
  require(!grad || value.same_shape(*grad), "parameter");
  nodes_.push_back({{}, &value, grad, {}, nullptr});
  return nodes_.size() - 1;
}

const Matrix& Tape::value(Var v) const {
  const Node& n = nodes_[v];
  return n.bound ? *n.bound : n.value;
}

Matrix& Tape::grad(Var v) {
  Node& n = nodes_[v];
  if (n.grad.empty()) {
    const Matrix& val = value(v);
    n.grad = Matrix(val.rows, val.cols);
  }
  return n.grad;
}

Tape::Var Tape::matmul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  require(A.cols == B.rows, "matmul");
  Matrix out(A.rows, B.cols);
  gemm_nn(A, B, out);
  return push(std::move(out), [a, b](Tape& t, Var self) {
    const Matrix& g = t.nodes_[self].grad;
    gemm_nt(g, t.value(b), t.grad(a));
    gemm_tn(t.value(a), g, t.grad(b));
  });
}

Tape::Var Tape::add(Var a, Var b) {
  require(value(a).same_shape(value(b)), "add");
  Matrix out = value(a);
  const Matrix& B = value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += B.data[i];
  return push(std::move(out), [a, b](Tape& t, Var self) {
    const Matrix& g = t.nodes_[self].grad;
    const auto& k = simd::active();
    k.axpy(1.0, g.data.data(), t.grad(a).data.data(), g.size());
    k.axpy(1.0, g.data.data(), t.grad(b).data.data(), g.size());
  });
}

Tape::Var Tape::add_row(Var a, Var row) {
  const Matrix& R = value(row);
  require(R.rows == 1 && R.cols == value(a).cols, "add_row");
  Matrix out = value(a);
  const auto& k = simd::active();
  for (std::size_t i = 0; i < out.rows; ++i) k.axpy(1.0, R.data.data(), out.row(i), out.cols);
  return push(std::move(out), [a, row](Tape& t, Var self) {
    const Matrix& g = t.nodes_[self].grad;
    const auto& k = simd::active();
    k.axpy(1.0, g.data.data(), t.grad(a).data.data(), g.size());
    Matrix& gr = t.grad(row);
    for (std::size_t i = 0; i < g.rows; ++i) k.axpy(1.0, g.row(i), gr.data.data(), g.cols);
  });
}

Tape::Var Tape::relu(Var a) {
  Matrix out = value(a);
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return push(std::move(out), [a](Tape& t, Var self) {
    const Matrix& g = t.nodes_[self].grad;
    const Matrix& x = t.value(a);
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x.data[i] > 0.0) ga.data[i] += g.data[i];
  });
}

Tape::Var Tape::concat_cols(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  require(A.rows == B.rows, "concat_cols");
  Matrix out(A.rows, A.cols + B.cols);
  for (std::size_t i = 0; i < A.rows; ++i) {
    std::copy(A.row(i), A.row(i) + A.cols, out.row(i));
    std::copy(B.row(i), B.row(i) + B.cols, out.row(i) + A.cols);
  }
  return push(std::move(out), [a, b](Tape& t, Var self) {
    const Matrix& g = t.nodes_[self].grad;
    Matrix& ga = t.grad(a);
    Matrix& gb = t.grad(b);
    const auto& k = simd::active();
    for (std::size_t i = 0; i < g.rows; ++i) {
      k.axpy(1.0, g.row(i), ga.row(i), ga.cols);
      k.axpy(1.0, g.row(i) + ga.cols, gb.row(i), gb.cols);
    }
  });
}

Tape::Var Tape::concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows");
  const std::size_t cols = value(parts[0]).cols;
  std::size_t rows = 0;
  for (Var p : parts) {
    require(value(p).cols == cols, "concat_rows");
    rows += value(p).rows;
  }
  Matrix out(rows, cols);
  std::size_t at = 0;
  for (Var p : parts) {
    const Matrix& m = value(p);
    std::copy(m.data.begin(), m.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(at * cols));
    at += m.rows;
  }
  return push(std::move(out), [parts](Tape& t, Var self) {
    const Matrix& g = t.nodes_[self].grad;
    std::size_t at = 0;
    for (Var p : parts) {
      Matrix& gp = t.grad(p);
      simd::active().axpy(1.0, g.row(at), gp.data.data(), gp.size());
      at += gp.rows;
    }
  });
}

Tape::Var Tape::gather_rows(Var a, Index rows) {
  const Matrix& A = value(a);
  Matrix out(rows.size(), A.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < A.rows, "gather_rows");
    std::copy(A.row(rows[i]), A.row(rows[i]) + A.cols, out.row(i));
  }
  return push(std::move(out), [a, rows = std::move(rows)](Tape& t, Var self) {
    const Matrix& g = t.nodes_[self].grad;
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < rows.size(); ++i) simd::active().axpy(1.0, g.row(i), ga.row(rows[i]), g.cols);
  });
}

Tape::Var Tape::scatter_sum(Var x, Index target, std::size_t rows) {
  const Matrix& X = value(x);
  require(target.size() == X.rows, "scatter_sum");
  Matrix out(rows, X.cols);
  for (std::size_t i = 0; i < target.size(); ++i) {
    require(target[i] < rows, "scatter_sum");
    simd::active().axpy(1.0, X.row(i), out.row(target[i]), X.cols);
  }
  return push(std::move(out), [x, target = std::move(target)](Tape& t, Var self) {
    const Matrix& g = t.nodes_[self].grad;
    Matrix& gx = t.grad(x);
    for (std::size_t i = 0; i < target.size(); ++i) simd::active().axpy(1.0, g.row(target[i]), gx.row(i), g.cols);
  });
}

Tape::Var Tape::scale_rows(Var a, std::vector<double> factors) {
  Matrix out = value(a);
  require(factors.size() == out.rows, "scale_rows");
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j) out(i, j) *= factors[i];
  return push(std::move(out), [a, factors = std::move(factors)](Tape& t, Var self) {
    const Matrix& g = t.nodes_[self].grad;
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < g.rows; ++i) simd::active().axpy(factors[i], g.row(i), ga.row(i), g.cols);
  });
}

Tape::Var Tape::replace_rows(Var base, Index rows, Var values) {
  Matrix out = value(base);
  const Matrix& V = value(values);
  require(V.rows == rows.size() && V.cols == out.cols, "replace_rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < out.rows, "replace_rows");
    std::copy(V.row(i), V.row(i) + V.cols, out.row(rows[i]));
  }
  return push(std::move(out), [base, values, rows = std::move(rows)](Tape& t, Var self) {
    Matrix g = t.nodes_[self].grad;
    Matrix& gv = t.grad(values);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy(g.row(rows[i]), g.row(rows[i]) + g.cols, gv.row(i));
      std::fill(g.row(rows[i]), g.row(rows[i]) + g.cols, 0.0);
    }
    Matrix& gb = t.grad(base);
    simd::active().axpy(1.0, g.data.data(), gb.data.data(), g.size());
  });
}

Tape::Var Tape::softmax_col(Var a) {
  const Matrix& A = value(a);
  require(A.cols == 1 && A.rows > 0, "softmax_col");
  Matrix out(A.rows, 1);
  const double m = *std::max_element(A.data.begin(), A.data.end());
  double z = 0.0;
  for (std::size_t i = 0; i < A.rows; ++i) z += out.data[i] = std::exp(A.data[i] - m);
  for (double& v : out.data) v /= z;
  return push(std::move(out), [a](Tape& t, Var self) {
    const Matrix& g = t.nodes_[self].grad;
    const Matrix& s = t.nodes_[self].value;
    const double inner = simd::scalar::dot(g.data.data(), s.data.data(), s.size());
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < s.rows; ++i) ga.data[i] += s.data[i] * (g.data[i] - inner);
  });
}

Tape::Var Tape::weighted_sum_rows(Var x, Var w) {
  const Matrix& X = value(x);
  const Matrix& W = value(w);
  require(W.cols == 1 && W.rows == X.rows, "weighted_sum_rows");
  Matrix out(1, X.cols);
  for (std::size_t i = 0; i < X.rows; ++i) simd::active().axpy(W.data[i], X.row(i), out.data.data(), X.cols);
  return push(std::move(out), [x, w](Tape& t, Var self) {
    const Matrix& g = t.nodes_[self].grad;
    const Matrix& X = t.value(x);
    const Matrix& W = t.value(w);
    Matrix& gx = t.grad(x);
    Matrix& gw = t.grad(w);
    const auto& k = simd::active();
    for (std::size_t i = 0; i < X.rows; ++i) {
      k.axpy(W.data[i], g.data.data(), gx.row(i), X.cols);
      gw.data[i] += k.dot(g.data.data(), X.row(i), X.cols);
    }
  });
}

Tape::Var Tape::bce_with_logits(Var logit, double label) {
  const Matrix& L = value(logit);
  require(L.rows == 1 && L.cols == 1, "bce_with_logits");
  const double z = L.data[0];
  // max(z,0) - z*y + log(1 + exp(-|z|))
  const double loss = std::max(z, 0.0) - z * label + std::log1p(std::exp(-std::abs(z)));
  return push(Matrix(1, 1, loss), [logit, label](Tape& t, Var self) {
    const double g = t.nodes_[self].grad.data[0];
    t.grad(logit).data[0] += g * (sigmoid(t.value(logit).data[0]) - label);
  });
}

void Tape::backward(Var out) {
  require(value(out).rows == 1 && value(out).cols == 1, "backward");
  grad(out).data[0] = 1.0;
  for (Var v = out + 1; v-- > 0;) {
    Node& n = nodes_[v];
    if (n.grad.empty()) continue;
    if (n.back) n.back(*this, v);
    if (n.bound_grad) simd::active().axpy(1.0, n.grad.data.data(), n.bound_grad->data.data(), n.grad.size());
  }
}

}  // namespace ipag
