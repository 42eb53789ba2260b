#include "ivae/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace ivae {

namespace {

Tape* join(const Tensor& a, const Tensor& b) {
  if (a.tape && b.tape && a.tape != b.tape)
    throw std::invalid_argument("tensors belong to different tapes");
  return a.tape ? a.tape : b.tape;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

int node_of(const Tensor& t) { return t.tracked() ? t.node : -1; }

Tensor track(Mat v, Tape* t, Tape::BackFn back) {
  Tensor r(std::move(v));
  if (t) {
    r.tape = t;
    r.node = t->record(std::move(back));
  }
  return r;
}

// Reduces a full-shape gradient to 1x1 when the parent was a broadcast
// scalar.
Mat fit(const Mat& g, bool parent_scalar) {
  if (parent_scalar && g.size() != 1) return Mat::Constant(1, 1, g.sum());
  return g;
}

}  // namespace

Tensor Tape::watch(Mat value) {
  Tensor t(std::move(value));
  t.tape = this;
  t.node = record(nullptr);
  return t;
}

int Tape::record(BackFn back) {
  nodes_.push_back(Node{std::move(back), Mat(), false});
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::add_grad(int node, const Mat& g) {
  Node& n = nodes_.at(static_cast<size_t>(node));
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    if (n.grad.rows() != g.rows() || n.grad.cols() != g.cols())
      throw std::invalid_argument("gradient shape mismatch");
    n.grad += g;
  }
}

void Tape::backward(const Tensor& loss) {
  if (!loss.tracked() || loss.tape != this)
    throw std::invalid_argument("backward: loss is not tracked on this tape");
  if (!loss.is_scalar())
    throw std::invalid_argument("backward: loss must be scalar");
  if (ran_backward_)
    throw std::logic_error("backward: tape already ran backward");
  ran_backward_ = true;
  add_grad(loss.node, Mat::Constant(1, 1, 1.0));
  for (int i = loss.node; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.has_grad && n.back) n.back(n.grad, *this);
  }
}

Mat Tape::grad(const Tensor& t) const {
  if (!t.tracked() || t.tape != this)
    throw std::invalid_argument("grad: tensor is not tracked on this tape");
  const Node& n = nodes_.at(static_cast<size_t>(t.node));
  if (!n.has_grad) return Mat::Zero(t.rows(), t.cols());
  return n.grad;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner extents disagree");
  Tape* t = join(a, b);
  Mat v = a.value() * b.value();
  if (!t) return Tensor(std::move(v));
  auto av = a.data, bv = b.data;
  int an = node_of(a), bn = node_of(b);
  return track(std::move(v), t, [=](const Mat& g, Tape& tp) {
    if (an >= 0) tp.add_grad(an, g * bv->transpose());
    if (bn >= 0) tp.add_grad(bn, av->transpose() * g);
  });
}

namespace {

// Shared skeleton for add/sub/mul with scalar-or-same-shape broadcasting.
enum class Bin { Add, Sub, Mul };

Tensor binary(const Tensor& a, const Tensor& b, Bin op) {
  const bool as = a.is_scalar(), bs = b.is_scalar();
  if (!as && !bs) require_same_shape(a, b, "elementwise");
  Tape* t = join(a, b);
  Mat v;
  switch (op) {
    case Bin::Add:
      if (as && !bs) v = (a.scalar() + b.value().array()).matrix();
      else if (bs && !as) v = (a.value().array() + b.scalar()).matrix();
      else v = a.value() + b.value();
      break;
    case Bin::Sub:
      if (as && !bs) v = (a.scalar() - b.value().array()).matrix();
      else if (bs && !as) v = (a.value().array() - b.scalar()).matrix();
      else v = a.value() - b.value();
      break;
    case Bin::Mul:
      if (as && !bs) v = a.scalar() * b.value();
      else if (bs && !as) v = b.scalar() * a.value();
      else v = a.value().cwiseProduct(b.value());
      break;
  }
  if (!t) return Tensor(std::move(v));
  auto av = a.data, bv = b.data;
  int an = node_of(a), bn = node_of(b);
  return track(std::move(v), t, [=](const Mat& g, Tape& tp) {
    switch (op) {
      case Bin::Add:
        if (an >= 0) tp.add_grad(an, fit(g, as));
        if (bn >= 0) tp.add_grad(bn, fit(g, bs));
        break;
      case Bin::Sub:
        if (an >= 0) tp.add_grad(an, fit(g, as));
        if (bn >= 0) tp.add_grad(bn, fit(Mat(-g), bs));
        break;
      case Bin::Mul:
        if (an >= 0) {
          Mat ga;
          if (as && !bs) ga = Mat::Constant(1, 1, g.cwiseProduct(*bv).sum());
          else if (bs && !as) ga = bv->coeff(0, 0) * g;
          else ga = g.cwiseProduct(*bv);
          tp.add_grad(an, ga);
        }
        if (bn >= 0) {
          Mat gb;
          if (bs && !as) gb = Mat::Constant(1, 1, g.cwiseProduct(*av).sum());
          else if (as && !bs) gb = av->coeff(0, 0) * g;
          else gb = g.cwiseProduct(*av);
          tp.add_grad(bn, gb);
        }
        break;
    }
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, Bin::Add); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, Bin::Sub); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, Bin::Mul); }

Tensor add_colwise(const Tensor& a, const Tensor& bias) {
  if (bias.cols() != 1 || bias.rows() != a.rows())
    throw std::invalid_argument("add_colwise: bias must be rows x 1");
  Tape* t = join(a, bias);
  Mat v = a.value().colwise() + Eigen::VectorXd(bias.value().col(0));
  if (!t) return Tensor(std::move(v));
  int an = node_of(a), bn = node_of(bias);
  return track(std::move(v), t, [=](const Mat& g, Tape& tp) {
    if (an >= 0) tp.add_grad(an, g);
    if (bn >= 0) tp.add_grad(bn, Mat(g.rowwise().sum()));
  });
}

namespace {

// Unary elementwise op: value map plus a local-derivative map evaluated at
// the input (or at the output, when cheaper).
template <typename FwdFn, typename GradFn>
Tensor unary(const Tensor& a, FwdFn fwd, GradFn dfn) {
  Mat v = fwd(a.value());
  if (!a.tracked()) return Tensor(std::move(v));
  auto av = a.data;
  int an = a.node;
  auto vptr = std::make_shared<Mat>(v);
  Tensor r = track(std::move(v), a.tape, [=](const Mat& g, Tape& tp) {
    tp.add_grad(an, Mat(g.cwiseProduct(dfn(*av, *vptr))));
  });
  return r;
}

}  // namespace

Tensor neg(const Tensor& a) {
  return unary(
      a, [](const Mat& x) { return Mat(-x); },
      [](const Mat& x, const Mat&) { return Mat::Constant(x.rows(), x.cols(), -1.0); });
}

Tensor scale(const Tensor& a, double k) {
  return unary(
      a, [k](const Mat& x) { return Mat(k * x); },
      [k](const Mat& x, const Mat&) { return Mat::Constant(x.rows(), x.cols(), k); });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, [](const Mat& x) { return Mat(x.array().exp().matrix()); },
      [](const Mat&, const Mat& y) { return y; });
}

Tensor log(const Tensor& a) {
  if (!(a.value().array() > 0.0).all())
    throw std::invalid_argument("log: non-positive input");
  return unary(
      a, [](const Mat& x) { return Mat(x.array().log().matrix()); },
      [](const Mat& x, const Mat&) { return Mat(x.cwiseInverse()); });
}

Tensor sigmoid(const Tensor& a) {
  auto fwd = [](const Mat& x) {
    return Mat((0.5 * (0.5 * x.array()).tanh() + 0.5).matrix());
  };
  return unary(a, fwd, [](const Mat&, const Mat& y) {
    return Mat(y.array() * (1.0 - y.array()));
  });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](const Mat& x) { return Mat(x.cwiseMax(0.0)); },
      [](const Mat& x, const Mat&) {
        return Mat((x.array() > 0.0).cast<double>().matrix());
      });
}

Tensor elu(const Tensor& a) {
  auto fwd = [](const Mat& x) {
    Mat y = x;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y(i) < 0.0) y(i) = std::expm1(y(i));
    return y;
  };
  return unary(a, fwd, [](const Mat& x, const Mat& y) {
    Mat d = Mat::Ones(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (x(i) < 0.0) d(i) = y(i) + 1.0;
    return d;
  });
}

Tensor sum(const Tensor& a) {
  Mat v = Mat::Constant(1, 1, a.value().sum());
  if (!a.tracked()) return Tensor(std::move(v));
  int an = a.node;
  Eigen::Index r = a.rows(), c = a.cols();
  return track(std::move(v), a.tape, [=](const Mat& g, Tape& tp) {
    tp.add_grad(an, Mat(Mat::Constant(r, c, g(0, 0))));
  });
}

Tensor mean(const Tensor& a) {
  const double n = static_cast<double>(a.value().size());
  Mat v = Mat::Constant(1, 1, a.value().sum() / n);
  if (!a.tracked()) return Tensor(std::move(v));
  int an = a.node;
  Eigen::Index r = a.rows(), c = a.cols();
  return track(std::move(v), a.tape, [=](const Mat& g, Tape& tp) {
    tp.add_grad(an, Mat(Mat::Constant(r, c, g(0, 0) / n)));
  });
}

Tensor logsumexp_rows(const std::vector<Tensor>& rows) {
  if (rows.empty())
    throw std::invalid_argument("logsumexp_rows: empty input");
  const Eigen::Index b = rows[0].cols();
  Tape* t = nullptr;
  for (const Tensor& r : rows) {
    if (r.rows() != 1 || r.cols() != b)
      throw std::invalid_argument("logsumexp_rows: all inputs must be 1 x B");
    if (r.tracked()) {
      if (t && t != r.tape)
        throw std::invalid_argument("tensors belong to different tapes");
      t = r.tape;
    }
  }
  Mat m = rows[0].value();
  for (size_t i = 1; i < rows.size(); ++i) m = m.cwiseMax(rows[i].value());
  Mat acc = Mat::Zero(1, b);
  for (const Tensor& r : rows)
    acc += (r.value() - m).array().exp().matrix();
  Mat v = m + acc.array().log().matrix();
  if (!t) return Tensor(std::move(v));
  std::vector<int> nodes;
  std::vector<std::shared_ptr<const Mat>> vals;
  for (const Tensor& r : rows) {
    nodes.push_back(node_of(r));
    vals.push_back(r.data);
  }
  auto out = std::make_shared<Mat>(v);
  return track(std::move(v), t, [=](const Mat& g, Tape& tp) {
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i] < 0) continue;
      Mat w = (*vals[i] - *out).array().exp().matrix();
      tp.add_grad(nodes[i], Mat(g.cwiseProduct(w)));
    }
  });
}

}  // namespace ivae
