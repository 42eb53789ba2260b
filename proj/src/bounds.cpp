#include "ivae/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "ivae/special.hpp"

namespace ivae {

namespace {

void check_noise(const BoundConfig& cfg, const std::vector<Mat>& noise) {
  if (cfg.mc_samples < 1)
    throw std::invalid_argument("bound: mc_samples must be >= 1");
  if (static_cast<int>(noise.size()) != cfg.mc_samples)
    throw std::invalid_argument("bound: noise draws != mc_samples");
}

Tensor average_rows(std::vector<Tensor> rows) {
  Tensor acc = rows[0];
  for (size_t i = 1; i < rows.size(); ++i) acc = add(acc, rows[i]);
  return scale(acc, 1.0 / static_cast<double>(rows.size()));
}

// ELBO and IELBO share everything but the per-sample reconstruction row.
template <typename ReconFn>
BoundTerms kl_style_bound(const Mat& x, const DiagGaussian& q,
                          const DecodeFn& decode, const BoundConfig& cfg,
                          const std::vector<Mat>& noise, ReconFn recon_row) {
  check_noise(cfg, noise);
  std::vector<Tensor> rows;
  rows.reserve(noise.size());
  for (const Mat& eta : noise) {
    Tensor z = sample_reparam(q, eta);
    rows.push_back(recon_row(decode(z)));
  }
  Tensor recon = average_rows(std::move(rows));
  Tensor div = kl_to_std_normal(q);
  Tensor total_row = sub(recon, div);
  BoundTerms t;
  t.objective = mean(total_row);
  t.reconstruction = recon.value().mean();
  t.divergence = div.value().mean();
  t.total = t.objective.scalar();
  return t;
}

}  // namespace

BoundTerms elbo(const Mat& x, const DiagGaussian& q, const DecodeFn& decode,
                const BoundConfig& cfg, const std::vector<Mat>& noise) {
  Tensor xc{x};
  return kl_style_bound(x, q, decode, cfg, noise, [&](DiagGaussian d) {
    return gauss_log_density(xc, d);
  });
}

BoundTerms ielbo(const Mat& x, const DiagGaussian& q, const DecodeFn& decode,
                 const BoundConfig& cfg, const std::vector<Mat>& noise) {
  Box box = box_around(x, cfg.epsilon);
  return kl_style_bound(x, q, decode, cfg, noise, [&](DiagGaussian d) {
    return log_interval_likelihood(d, box);
  });
}

BoundTerms irelbo(const Mat& x, const DiagGaussian& q, const DecodeFn& decode,
                  const BoundConfig& cfg, const std::vector<Mat>& noise) {
  if (!(cfg.alpha > 1.0 && cfg.alpha < 2.0))
    throw std::invalid_argument("irelbo: alpha must lie in (1, 2)");
  check_noise(cfg, noise);
  const double a = cfg.alpha;
  Box box = box_around(x, cfg.epsilon);
  const Eigen::Index b = x.cols();
  DiagGaussian prior{Tensor(Mat::Zero(noise[0].rows(), b)),
                     Tensor(Mat::Ones(noise[0].rows(), b))};

  std::vector<Tensor> log_h;
  double recon_acc = 0.0, div_acc = 0.0;
  BoundTerms t;
  for (const Mat& eta : noise) {
    Tensor z = sample_reparam(q, eta);
    DiagGaussian d = decode(z);
    Tensor ipow = scale(log_inv_power_interval(d, box, a), 2.0 - a);
    Tensor ratio =
        scale(sub(gauss_log_density(z, q), gauss_log_density(z, prior)),
              a - 1.0);
    Tensor lh = add(ipow, ratio);
    recon_acc += ipow.value().mean();
    div_acc += ratio.value().mean();
    for (Eigen::Index j = 0; j < b; ++j)
      t.per_sample_log_weights.push_back(lh.value()(0, j));
    log_h.push_back(std::move(lh));
  }
  const double s = static_cast<double>(noise.size());
  Tensor lse = logsumexp_rows(log_h);
  // Per-example: (log volume - log mean h) / (alpha - 1), with the box
  // volume in log form sum_j log(hi_j - lo_j).
  Mat log_vol = (box.hi - box.lo).array().log().matrix().colwise().sum();
  Tensor total_row = scale(
      sub(Tensor(Mat((log_vol.array() + std::log(s)).matrix())), lse),
      1.0 / (a - 1.0));
  t.objective = mean(total_row);
  t.reconstruction = recon_acc / s;
  t.divergence = div_acc / s;
  t.total = t.objective.scalar();
  return t;
}

BoundTerms evaluate_bound(const Mat& x, const DiagGaussian& q,
                          const DecodeFn& decode, const BoundConfig& cfg,
                          const std::vector<Mat>& noise) {
  switch (cfg.kind) {
    case BoundKind::Elbo:
      return elbo(x, q, decode, cfg, noise);
    case BoundKind::Ielbo:
      return ielbo(x, q, decode, cfg, noise);
    case BoundKind::Irelbo:
      return irelbo(x, q, decode, cfg, noise);
  }
  throw std::logic_error("evaluate_bound: unknown kind");
}

McEvidence mc_log_interval_evidence(const Mat& x, const DecodeFn& decode,
                                    int latent_dim, double epsilon,
                                    int n_draws, std::mt19937_64& rng) {
  if (n_draws < 1)
    throw std::invalid_argument("mc_log_interval_evidence: n_draws >= 1");
  Box box = box_around(x, epsilon);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> logw(static_cast<size_t>(n_draws));
  for (int s = 0; s < n_draws; ++s) {
    Mat z(latent_dim, 1);
    for (int i = 0; i < latent_dim; ++i) z(i, 0) = nd(rng);
    DiagGaussian d = decode(Tensor(z));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      acc += special::log_gauss_interval(d.mu.value()(i, 0),
                                         d.sigma.value()(i, 0), box.lo(i, 0),
                                         box.hi(i, 0));
    logw[static_cast<size_t>(s)] = acc;
  }
  const double logn = std::log(static_cast<double>(n_draws));
  double l1 = special::log_sum_exp(logw) - logn;
  std::vector<double> logw2(logw);
  for (double& v : logw2) v *= 2.0;
  double l2 = special::log_sum_exp(logw2) - logn;
  double ratio = std::exp(l2 - 2.0 * l1);  // E[W^2] / E[W]^2 estimate
  double se = std::sqrt(std::max(ratio - 1.0, 0.0) /
                        static_cast<double>(n_draws));
  return {l1, se};
}

}  // namespace ivae
