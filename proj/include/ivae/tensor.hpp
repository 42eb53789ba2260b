#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

// Dense matrices with reverse-mode differentiation on a per-step tape.
// A Tensor is a value plus an optional handle into the Tape that produced
// it; untracked Tensors are plain constants and follow the exact same
// forward arithmetic.

namespace ivae {

using Mat = Eigen::MatrixXd;

class Tape;

struct Tensor {
  std::shared_ptr<const Mat> data;
  Tape* tape = nullptr;
  int node = -1;

  Tensor() = default;
  Tensor(Mat m) : data(std::make_shared<Mat>(std::move(m))) {}
  explicit Tensor(double s) : Tensor(Mat::Constant(1, 1, s)) {}

  const Mat& value() const { return *data; }
  Eigen::Index rows() const { return data->rows(); }
  Eigen::Index cols() const { return data->cols(); }
  bool tracked() const { return tape != nullptr; }
  bool is_scalar() const { return data->size() == 1; }
  double scalar() const { return (*data)(0, 0); }
};

class Tape {
 public:
  using BackFn = std::function<void(const Mat& grad, Tape& tape)>;

  // Registers a leaf (parameter) tensor. Its gradient is available after
  // backward().
  Tensor watch(Mat value);

  // Records an interior node; returns its handle. `back` receives the
  // node's accumulated output gradient and pushes contributions into its
  // parents via add_grad.
  int record(BackFn back);

  void add_grad(int node, const Mat& g);

  // Reverse sweep from a scalar tracked loss. A tape runs backward once;
  // a second call throws.
  void backward(const Tensor& loss);

  // Gradient of a watched/recorded tensor; zero-filled if it never
  // received one. Only valid after backward().
  Mat grad(const Tensor& t) const;

  bool ran_backward() const { return ran_backward_; }

 private:
  struct Node {
    BackFn back;
    Mat grad;
    bool has_grad = false;
  };
  std::vector<Node> nodes_;
  bool ran_backward_ = false;
};

// --- op library -----------------------------------------------------------
// Binary elementwise ops accept same-shape operands or a 1x1 scalar paired
// with a tensor. Mixing tensors from two different tapes throws.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// a (m x n) plus a column bias (m x 1), broadcast across columns.
Tensor add_colwise(const Tensor& a, const Tensor& bias);

Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double k);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);  // throws on non-positive entries
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor elu(const Tensor& a);  // alpha = 1
Tensor sum(const Tensor& a);   // 1x1
Tensor mean(const Tensor& a);  // 1x1

// Row-stack logsumexp: all inputs are 1 x B rows; returns the 1 x B row of
// per-column log sum exp over the stack.
Tensor logsumexp_rows(const std::vector<Tensor>& rows);

}  // namespace ivae
