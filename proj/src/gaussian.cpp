#include "ivae/gaussian.hpp"

#include <cmath>
#include <stdexcept>

#include "ivae/special.hpp"

namespace ivae {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void require_match(const DiagGaussian& g, Eigen::Index rows,
                   Eigen::Index cols, const char* op) {
  if (g.mu.rows() != rows || g.mu.cols() != cols || g.sigma.rows() != rows ||
      g.sigma.cols() != cols)
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

Box box_around(const Mat& x, double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("box_around: epsilon must be positive");
  return Box{Mat((x.array() - epsilon).matrix()),
             Mat((x.array() + epsilon).matrix())};
}

Tensor sample_reparam(const DiagGaussian& g, const Mat& noise) {
  require_match(g, noise.rows(), noise.cols(), "sample_reparam");
  return add(g.mu, mul(g.sigma, Tensor(noise)));
}

Tensor kl_to_std_normal(const DiagGaussian& g) {
  const Mat& mu = g.mu.value();
  const Mat& sg = g.sigma.value();
  Mat v = 0.5 * (mu.array().square() + sg.array().square() - 1.0 -
                 2.0 * sg.array().log())
                    .matrix()
                    .colwise()
                    .sum();
  Tape* t = g.mu.tape ? g.mu.tape : g.sigma.tape;
  if (!t) return Tensor(std::move(v));
  auto muv = g.mu.data, sgv = g.sigma.data;
  int mn = g.mu.tracked() ? g.mu.node : -1;
  int sn = g.sigma.tracked() ? g.sigma.node : -1;
  Tensor r(std::move(v));
  r.tape = t;
  r.node = t->record([=](const Mat& gr, Tape& tp) {
    // gr is 1 x B; broadcast down each column.
    if (mn >= 0) {
      Mat gm = muv->array().rowwise() * gr.row(0).array();
      tp.add_grad(mn, gm);
    }
    if (sn >= 0) {
      Mat gs = (sgv->array() - sgv->array().inverse()).rowwise() *
               gr.row(0).array();
      tp.add_grad(sn, gs);
    }
  });
  return r;
}

namespace {

// Shared machinery for the two interval kernels: a scalar kernel produces
// value and d/dmu, d/dsigma per entry; rows are summed per column.
template <typename Kernel>
Tensor interval_reduce(const DiagGaussian& g, const Box& box, Kernel kernel,
                       const char* op) {
  const Eigen::Index n = box.lo.rows(), b = box.lo.cols();
  if (box.hi.rows() != n || box.hi.cols() != b)
    throw std::invalid_argument(std::string(op) + ": box shape mismatch");
  require_match(g, n, b, op);
  const Mat& mu = g.mu.value();
  const Mat& sg = g.sigma.value();
  Mat v = Mat::Zero(1, b);
  Mat dmu(n, b), dsg(n, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double dm, ds;
      acc += kernel(mu(i, j), sg(i, j), box.lo(i, j), box.hi(i, j), &dm, &ds);
      dmu(i, j) = dm;
      dsg(i, j) = ds;
    }
    v(0, j) = acc;
  }
  Tape* t = g.mu.tape ? g.mu.tape : g.sigma.tape;
  if (!t) return Tensor(std::move(v));
  int mn = g.mu.tracked() ? g.mu.node : -1;
  int sn = g.sigma.tracked() ? g.sigma.node : -1;
  auto dmu_p = std::make_shared<Mat>(std::move(dmu));
  auto dsg_p = std::make_shared<Mat>(std::move(dsg));
  Tensor r(std::move(v));
  r.tape = t;
  r.node = t->record([=](const Mat& gr, Tape& tp) {
    if (mn >= 0)
      tp.add_grad(mn, Mat(dmu_p->array().rowwise() * gr.row(0).array()));
    if (sn >= 0)
      tp.add_grad(sn, Mat(dsg_p->array().rowwise() * gr.row(0).array()));
  });
  return r;
}

}  // namespace

Tensor log_interval_likelihood(const DiagGaussian& g, const Box& box) {
  return interval_reduce(
      g, box,
      [](double mu, double sg, double lo, double hi, double* dm, double* ds) {
        return special::log_gauss_interval_grad(mu, sg, lo, hi, dm, ds);
      },
      "log_interval_likelihood");
}

Tensor log_inv_power_interval(const DiagGaussian& g, const Box& box,
                              double alpha) {
  return interval_reduce(
      g, box,
      [alpha](double mu, double sg, double lo, double hi, double* dm,
              double* ds) {
        return special::log_inverse_power_gauss_interval_grad(mu, sg, lo, hi,
                                                              alpha, dm, ds);
      },
      "log_inv_power_interval");
}

Tensor gauss_log_density(const Tensor& x, const DiagGaussian& g) {
  const Eigen::Index n = x.rows(), b = x.cols();
  require_match(g, n, b, "gauss_log_density");
  const Mat& mu = g.mu.value();
  const Mat& sg = g.sigma.value();
  Mat z = (x.value() - mu).cwiseQuotient(sg);
  Mat v = (-kLogSqrt2Pi - sg.array().log() - 0.5 * z.array().square())
              .matrix()
              .colwise()
              .sum();
  Tape* t = x.tape ? x.tape : (g.mu.tape ? g.mu.tape : g.sigma.tape);
  if (!t) return Tensor(std::move(v));
  int xn = x.tracked() ? x.node : -1;
  int mn = g.mu.tracked() ? g.mu.node : -1;
  int sn = g.sigma.tracked() ? g.sigma.node : -1;
  auto zp = std::make_shared<Mat>(std::move(z));
  auto sgp = g.sigma.data;
  Tensor r(std::move(v));
  r.tape = t;
  r.node = t->record([=](const Mat& gr, Tape& tp) {
    Mat zos = zp->cwiseQuotient(*sgp);  // (x - mu) / sigma^2
    if (xn >= 0)
      tp.add_grad(xn, Mat((-zos.array()).rowwise() * gr.row(0).array()));
    if (mn >= 0)
      tp.add_grad(mn, Mat(zos.array().rowwise() * gr.row(0).array()));
    if (sn >= 0) {
      Mat dsg = (zp->array().square() - 1.0) / sgp->array();
      tp.add_grad(sn, Mat(dsg.array().rowwise() * gr.row(0).array()));
    }
  });
  return r;
}

}  // namespace ivae
