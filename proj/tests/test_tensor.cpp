#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "ivae/rng.hpp"
#include "ivae/tensor.hpp"

using namespace ivae;

namespace {

// Central finite difference of a scalar-valued function of one matrix input
// against the tape gradient.
void check_grad(const Mat& x0,
                const std::function<Tensor(const Tensor&)>& f,
                double tol = 1e-6) {
  Tape tape;
  Tensor x = tape.watch(x0);
  Tensor y = f(x);
  REQUIRE(y.is_scalar());
  tape.backward(y);
  Mat g = tape.grad(x);
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < x0.cols(); ++j) {
    for (Eigen::Index i = 0; i < x0.rows(); ++i) {
      Mat xp = x0, xm = x0;
      xp(i, j) += h;
      xm(i, j) -= h;
      const double fd =
          (f(Tensor(xp)).scalar() - f(Tensor(xm)).scalar()) / (2 * h);
      const double scale = std::max({1.0, std::abs(fd), std::abs(g(i, j))});
      CHECK(std::abs(g(i, j) - fd) / scale <= tol);
    }
  }
}

Mat rand_mat(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
             double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = u(rng);
  return m;
}

}  // namespace

TEST_CASE("forward values") {
  Mat a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 5, 6, 7, 8;
  CHECK(matmul(Tensor(a), Tensor(b)).value()(0, 0) == 19);
  CHECK(matmul(Tensor(a), Tensor(b)).value()(1, 1) == 50);
  CHECK(add(Tensor(a), Tensor(b)).value()(0, 1) == 8);
  CHECK(sub(Tensor(a), Tensor(b)).value()(1, 0) == -4);
  CHECK(mul(Tensor(a), Tensor(b)).value()(1, 1) == 32);
  CHECK(neg(Tensor(a)).value()(0, 0) == -1);
  CHECK(scale(Tensor(a), 3.0).value()(1, 0) == 9);
  CHECK(sum(Tensor(a)).scalar() == 10);
  CHECK(mean(Tensor(a)).scalar() == 2.5);
  CHECK(ivae::exp(Tensor(a)).value()(0, 0) == doctest::Approx(std::exp(1.0)));
  CHECK(ivae::log(ivae::exp(Tensor(a))).value()(1, 1) ==
        doctest::Approx(4.0));
  CHECK(sigmoid(Tensor(Mat::Zero(1, 1))).scalar() == doctest::Approx(0.5));
  CHECK(sigmoid(Tensor(Mat::Constant(1, 1, 100.0))).scalar() ==
        doctest::Approx(1.0));
  Mat n(1, 3);
  n << -2.0, 0.0, 3.0;
  Mat rl = relu(Tensor(n)).value();
  CHECK(rl(0, 0) == 0.0);
  CHECK(rl(0, 2) == 3.0);
  Mat el = elu(Tensor(n)).value();
  CHECK(el(0, 0) == doctest::Approx(std::expm1(-2.0)));
  CHECK(el(0, 1) == 0.0);
  CHECK(el(0, 2) == 3.0);
}

TEST_CASE("scalar broadcast in binary ops") {
  Mat a(2, 2);
  a << 1, 2, 3, 4;
  CHECK(add(Tensor(a), Tensor(10.0)).value()(1, 1) == 14);
  CHECK(add(Tensor(10.0), Tensor(a)).value()(0, 0) == 11);
  CHECK(sub(Tensor(a), Tensor(1.0)).value()(0, 1) == 1);
  CHECK(sub(Tensor(10.0), Tensor(a)).value()(0, 0) == 9);
  CHECK(mul(Tensor(a), Tensor(2.0)).value()(1, 0) == 6);
}

TEST_CASE("add_colwise broadcasts a column bias") {
  Mat a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  Mat bias(2, 1);
  bias << 10, 20;
  Mat r = add_colwise(Tensor(a), Tensor(bias)).value();
  CHECK(r(0, 2) == 13);
  CHECK(r(1, 0) == 24);
}

TEST_CASE("log rejects non-positive entries") {
  Mat a(1, 2);
  a << 1.0, 0.0;
  CHECK_THROWS_AS(ivae::log(Tensor(a)), std::invalid_argument);
  a << 1.0, -2.0;
  CHECK_THROWS_AS(ivae::log(Tensor(a)), std::invalid_argument);
}

TEST_CASE("shape mismatch throws") {
  Mat a = Mat::Zero(2, 3), b = Mat::Zero(3, 3);
  CHECK_THROWS_AS(add(Tensor(a), Tensor(b)), std::invalid_argument);
  CHECK_THROWS_AS(matmul(Tensor(a), Tensor(Mat::Zero(2, 2))),
                  std::invalid_argument);
}

TEST_CASE("backward: matmul chain") {
  std::mt19937_64 rng(1);
  Mat w = rand_mat(rng, 3, 4);
  Mat x = rand_mat(rng, 4, 5);
  check_grad(w, [&](const Tensor& t) { return sum(matmul(t, Tensor(x))); });
  check_grad(x, [&](const Tensor& t) { return sum(matmul(Tensor(w), t)); });
}

TEST_CASE("backward: elementwise ops") {
  std::mt19937_64 rng(2);
  Mat a = rand_mat(rng, 3, 4);
  Mat b = rand_mat(rng, 3, 4);
  check_grad(a, [&](const Tensor& t) { return sum(mul(t, Tensor(b))); });
  check_grad(a, [&](const Tensor& t) { return sum(mul(t, t)); });
  check_grad(a, [&](const Tensor& t) { return sum(sub(Tensor(b), t)); });
  check_grad(a, [&](const Tensor& t) { return mean(ivae::exp(t)); });
  check_grad(a, [&](const Tensor& t) { return sum(sigmoid(t)); });
  check_grad(a, [&](const Tensor& t) { return sum(elu(t)); });
  check_grad(a, [&](const Tensor& t) { return sum(neg(scale(t, 2.5))); });
  Mat pos = rand_mat(rng, 3, 4, 0.1, 2.0);
  check_grad(pos, [&](const Tensor& t) { return sum(ivae::log(t)); });
  // relu away from the kink.
  Mat far = rand_mat(rng, 3, 4);
  for (double* p = far.data(); p != far.data() + far.size(); ++p)
    if (std::abs(*p) < 0.1) *p = 0.5;
  check_grad(far, [&](const Tensor& t) { return sum(relu(t)); });
}

TEST_CASE("backward: scalar broadcast operand") {
  std::mt19937_64 rng(3);
  Mat a = rand_mat(rng, 2, 3);
  Mat s = Mat::Constant(1, 1, 0.7);
  check_grad(s, [&](const Tensor& t) { return sum(mul(Tensor(a), t)); });
  check_grad(s, [&](const Tensor& t) { return sum(add(t, Tensor(a))); });
  check_grad(s, [&](const Tensor& t) { return sum(sub(t, Tensor(a))); });
  check_grad(a, [&](const Tensor& t) { return sum(mul(t, Tensor(0.7))); });
}

TEST_CASE("backward: add_colwise bias") {
  std::mt19937_64 rng(4);
  Mat a = rand_mat(rng, 3, 5);
  Mat bias = rand_mat(rng, 3, 1);
  check_grad(bias,
             [&](const Tensor& t) { return sum(add_colwise(Tensor(a), t)); });
  check_grad(a, [&](const Tensor& t) {
    return sum(add_colwise(t, Tensor(bias)));
  });
}

TEST_CASE("backward: fan-out accumulates") {
  // y = sum(x * x + x): dy/dx = 2x + 1 through two uses of x.
  Mat x0(2, 2);
  x0 << 0.3, -0.4, 1.2, 0.0;
  Tape tape;
  Tensor x = tape.watch(x0);
  Tensor y = sum(add(mul(x, x), x));
  tape.backward(y);
  Mat g = tape.grad(x);
  for (Eigen::Index i = 0; i < 4; ++i)
    CHECK(g(i) == doctest::Approx(2 * x0(i) + 1).epsilon(1e-12));
}

TEST_CASE("backward: two-layer MLP composite") {
  std::mt19937_64 rng(5);
  Mat w1 = rand_mat(rng, 4, 3), b1 = rand_mat(rng, 4, 1);
  Mat w2 = rand_mat(rng, 2, 4), b2 = rand_mat(rng, 2, 1);
  Mat x = rand_mat(rng, 3, 6);
  auto net = [&](const Tensor& w1t, const Tensor& b1t, const Tensor& w2t,
                 const Tensor& b2t) {
    Tensor h = elu(add_colwise(matmul(w1t, Tensor(x)), b1t));
    return mean(sigmoid(add_colwise(matmul(w2t, h), b2t)));
  };
  check_grad(w1, [&](const Tensor& t) {
    return net(t, Tensor(b1), Tensor(w2), Tensor(b2));
  });
  check_grad(b1, [&](const Tensor& t) {
    return net(Tensor(w1), t, Tensor(w2), Tensor(b2));
  });
  check_grad(w2, [&](const Tensor& t) {
    return net(Tensor(w1), Tensor(b1), t, Tensor(b2));
  });
  check_grad(b2, [&](const Tensor& t) {
    return net(Tensor(w1), Tensor(b1), Tensor(w2), t);
  });
}

TEST_CASE("logsumexp_rows value and shift invariance") {
  Mat r1(1, 3), r2(1, 3);
  r1 << 0.0, 1000.0, -1.0;
  r2 << 0.0, 1000.0, 2.0;
  Mat lse = logsumexp_rows({Tensor(r1), Tensor(r2)}).value();
  CHECK(lse.rows() == 1);
  CHECK(lse.cols() == 3);
  CHECK(lse(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(lse(0, 1) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
  CHECK(lse(0, 2) ==
        doctest::Approx(std::log(std::exp(-1.0) + std::exp(2.0)))
            .epsilon(1e-14));
}

TEST_CASE("logsumexp_rows backward is the softmax weighting") {
  std::mt19937_64 rng(6);
  Mat r1 = rand_mat(rng, 1, 4), r2 = rand_mat(rng, 1, 4),
      r3 = rand_mat(rng, 1, 4);
  check_grad(r1, [&](const Tensor& t) {
    return sum(logsumexp_rows({t, Tensor(r2), Tensor(r3)}));
  });
  check_grad(r2, [&](const Tensor& t) {
    return sum(logsumexp_rows({Tensor(r1), t, Tensor(r3)}));
  });
}

TEST_CASE("tape runs backward once") {
  Tape tape;
  Tensor x = tape.watch(Mat::Constant(1, 1, 2.0));
  Tensor y = mul(x, x);
  tape.backward(y);
  CHECK(tape.grad(x)(0, 0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(tape.backward(y), std::logic_error);
}

TEST_CASE("backward requires a scalar tracked loss") {
  Tape tape;
  Tensor x = tape.watch(Mat::Zero(2, 2));
  Tensor y = add(x, x);
  CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);
  CHECK_THROWS_AS(tape.backward(Tensor(1.0)), std::invalid_argument);
}

TEST_CASE("mixing tensors from two tapes throws") {
  Tape t1, t2;
  Tensor a = t1.watch(Mat::Zero(2, 2));
  Tensor b = t2.watch(Mat::Zero(2, 2));
  CHECK_THROWS_AS(add(a, b), std::invalid_argument);
}

TEST_CASE("untracked tensors follow the same forward arithmetic") {
  std::mt19937_64 rng(8);
  Mat a = rand_mat(rng, 3, 3), b = rand_mat(rng, 3, 3);
  Tape tape;
  Tensor at = tape.watch(a);
  Mat tracked = sigmoid(matmul(at, Tensor(b))).value();
  Mat plain = sigmoid(matmul(Tensor(a), Tensor(b))).value();
  CHECK((tracked - plain).cwiseAbs().maxCoeff() == 0.0);
}
