#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "ipag/autodiff.hpp"
#include "ipag/simd.hpp"
#include "model_oracle.hpp"

using namespace ipag;

namespace {

Matrix naive_mul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      for (std::size_t p = 0; p < a.cols; ++p) c(i, j) += a(i, p) * b(p, j);
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

double max_diff(const Matrix& a, const Matrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.data[i] - b.data[i]));
  return d;
}

struct IsaGuard {
  simd::Isa saved = simd::active_isa();
  ~IsaGuard() { simd::set_active_isa(saved); }
};

// Central differences of a scalar function of `m` against `analytic`.
double gradient_error(Matrix& m, const Matrix& analytic, const std::function<double()>& f) {
  const double eps = 1e-6;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double keep = m.data[i];
    m.data[i] = keep + eps;
    const double up = f();
    m.data[i] = keep - eps;
    const double down = f();
    m.data[i] = keep;
    const double fd = (up - down) / (2 * eps);
    num += (fd - analytic.data[i]) * (fd - analytic.data[i]);
    den += fd * fd + analytic.data[i] * analytic.data[i];
  }
  return den == 0.0 ? 0.0 : std::sqrt(num / den);
}

}  // namespace

TEST_CASE("every available SIMD set agrees with the scalar kernels") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (simd::Isa isa : {simd::Isa::scalar, simd::Isa::avx2, simd::Isa::neon}) {
    if (!simd::available(isa)) continue;
    CAPTURE(simd::to_string(isa));
    const auto& k = simd::kernels(isa);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 17u, 64u, 1001u}) {
      std::vector<double> a(n), b(n), y(n), y_ref(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
        y[i] = y_ref[i] = u(rng);
      }
      const double want = simd::scalar::dot(a.data(), b.data(), n);
      CHECK(std::abs(k.dot(a.data(), b.data(), n) - want) <= 1e-12 * (1.0 + std::abs(want)) * std::sqrt(double(n) + 1));
      k.axpy(0.37, a.data(), y.data(), n);
      simd::scalar::axpy(0.37, a.data(), y_ref.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] - y_ref[i]) <= 1e-15);
    }
  }
}

TEST_CASE("scalar is always selectable and unavailable sets are refused") {
  IsaGuard guard;
  simd::set_active_isa(simd::Isa::scalar);
  CHECK(simd::active_isa() == simd::Isa::scalar);
  for (simd::Isa isa : {simd::Isa::avx2, simd::Isa::neon})
    if (!simd::available(isa)) CHECK_THROWS_AS(simd::set_active_isa(isa), std::invalid_argument);
}

TEST_CASE("matrix products match a triple loop under each SIMD set") {
  IsaGuard guard;
  std::mt19937_64 rng(2);
  for (simd::Isa isa : {simd::Isa::scalar, simd::Isa::avx2, simd::Isa::neon}) {
    if (!simd::available(isa)) continue;
    simd::set_active_isa(isa);
    for (int t = 0; t < 20; ++t) {
      const std::size_t m = 1 + rng() % 9, k = 1 + rng() % 13, n = 1 + rng() % 11;
      const Matrix a = test::random_matrix(rng, m, k), b = test::random_matrix(rng, k, n);
      Matrix c(m, n);
      gemm_nn(a, b, c);
      CHECK(max_diff(c, naive_mul(a, b)) < 1e-12);
      Matrix d(m, n);
      gemm_nt(a, transpose(b), d);
      CHECK(max_diff(d, naive_mul(a, b)) < 1e-12);
      Matrix e(k, n);
      const Matrix x = test::random_matrix(rng, m, n);
      gemm_tn(a, x, e);
      CHECK(max_diff(e, naive_mul(transpose(a), x)) < 1e-12);
    }
  }
  Matrix bad(2, 2);
  CHECK_THROWS_AS(gemm_nn(Matrix(2, 3), Matrix(2, 3), bad), ShapeError);
}

TEST_CASE("tape gradients match central differences for every op") {
  std::mt19937_64 rng(3);
  Matrix a = test::random_matrix(rng, 4, 3), w = test::random_matrix(rng, 3, 5), r = test::random_matrix(rng, 1, 5);
  Matrix v = test::random_matrix(rng, 2, 5), q = test::random_matrix(rng, 5, 1);
  Matrix ga(4, 3), gw(3, 5), gr(1, 5), gv(2, 5), gq(5, 1);

  auto build = [&](Tape& t, bool grads) {
    auto A = t.parameter(a, grads ? &ga : nullptr);
    auto W = t.parameter(w, grads ? &gw : nullptr);
    auto R = t.parameter(r, grads ? &gr : nullptr);
    auto V = t.parameter(v, grads ? &gv : nullptr);
    auto Q = t.parameter(q, grads ? &gq : nullptr);
    auto x = t.relu(t.add_row(t.matmul(A, W), R));                       // 4x5
    auto y = t.replace_rows(x, {3, 1}, V);                              // 4x5
    auto s = t.scale_rows(t.scatter_sum(t.gather_rows(y, {0, 2, 2, 3}), {1, 0, 1, 2}, 3), {0.5, 2.0, -1.0});
    auto c = t.concat_rows({s, t.gather_rows(x, {1})});                 // 4x5
    auto wide = t.concat_cols(c, t.add(c, c));                          // 4x10
    auto gate = t.softmax_col(t.matmul(t.gather_rows(wide, {0, 1, 2, 3}), t.concat_rows({Q, Q})));
    auto pooled = t.weighted_sum_rows(c, gate);                         // 1x5
    return t.bce_with_logits(t.matmul(pooled, Q), 1.0);
  };
  auto loss = [&] {
    Tape t;
    return t.value(build(t, false)).data[0];
  };
  Tape t;
  t.backward(build(t, true));
  CHECK(gradient_error(a, ga, loss) < 1e-7);
  CHECK(gradient_error(w, gw, loss) < 1e-7);
  CHECK(gradient_error(r, gr, loss) < 1e-7);
  CHECK(gradient_error(v, gv, loss) < 1e-7);
  CHECK(gradient_error(q, gq, loss) < 1e-7);
}

TEST_CASE("sigmoid and cross-entropy stay finite at extremes") {
  CHECK(sigmoid(1000) == 1.0);
  CHECK(sigmoid(-1000) == 0.0);
  CHECK(sigmoid(0) == 0.5);
  Tape t;
  auto z = t.constant(Matrix(1, 1, -800.0));
  CHECK(std::isfinite(t.value(t.bce_with_logits(z, 1.0)).data[0]));
  CHECK(t.value(t.bce_with_logits(z, 1.0)).data[0] == doctest::Approx(800.0));
  auto big = t.constant(Matrix(2, 1, 0.0));
  big = t.constant([] {
    Matrix m(2, 1);
    m.data = {1000.0, -1000.0};
    return m;
  }());
  const Matrix& s = t.value(t.softmax_col(big));
  CHECK(s.data[0] == 1.0);
  CHECK(s.data[1] == 0.0);
}
