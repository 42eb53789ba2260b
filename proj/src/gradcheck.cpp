#include "ivae/gradcheck.hpp"

#include <cmath>
#include <sstream>

#include "ivae/rng.hpp"

namespace ivae {

namespace {

ModelConfig toy_config(BoundKind kind) {
  ModelConfig m;
  m.input_dim = 4;
  m.hidden = {5};
  m.activation = Activation::Elu;
  m.latent_dim = 2;
  m.bias_init = 0.1;
  m.bound.kind = kind;
  m.bound.epsilon = kind == BoundKind::Irelbo ? 0.05 : 0.01;
  m.bound.alpha = 1.5;
  m.bound.mc_samples = 2;
  return m;
}

double objective(const ModelConfig& cfg, const VaeParams& params,
                 const Mat& x, const std::vector<Mat>& noise) {
  std::vector<Tensor> pt = attach_params(params, nullptr);
  DiagGaussian q = encode(cfg, pt, Tensor(x));
  auto dec = [&](const Tensor& z) { return decode(cfg, pt, z); };
  return evaluate_bound(x, q, dec, cfg.bound, noise).total;
}

const char* bound_name(BoundKind k) {
  switch (k) {
    case BoundKind::Elbo: return "elbo";
    case BoundKind::Ielbo: return "ielbo";
    case BoundKind::Irelbo: return "irelbo";
  }
  return "?";
}

}  // namespace

GradcheckReport run_gradcheck(std::uint64_t seed,
                              const std::optional<GradCorruption>& corrupt) {
  GradcheckReport report;
  const double h = 1e-6;
  for (BoundKind kind :
       {BoundKind::Elbo, BoundKind::Ielbo, BoundKind::Irelbo}) {
    ModelConfig cfg = toy_config(kind);
    VaeParams params = init_params(cfg, seed);
    std::mt19937_64 rng = make_rng(seed, rng_stream::kNoise, 77);
    std::uniform_real_distribution<double> upix(0.05, 0.95);
    Mat x(cfg.input_dim, 1);
    for (int i = 0; i < cfg.input_dim; ++i) x(i, 0) = upix(rng);
    std::vector<Mat> noise;
    for (int s = 0; s < cfg.bound.mc_samples; ++s)
      noise.push_back(normal_mat(rng, cfg.latent_dim, 1));

    // Analytic gradients in one backward pass.
    Tape tape;
    std::vector<Tensor> pt = attach_params(params, &tape);
    DiagGaussian q = encode(cfg, pt, Tensor(x));
    auto dec = [&](const Tensor& z) { return decode(cfg, pt, z); };
    BoundTerms terms = evaluate_bound(x, q, dec, cfg.bound, noise);
    tape.backward(terms.objective);

    for (size_t b = 0; b < params.values.size(); ++b) {
      Mat analytic = tape.grad(pt[b]);
      if (corrupt && corrupt->block == params.names[b])
        analytic.array() += corrupt->delta;
      double worst = 0.0;
      Mat& block = params.values[b];
      for (Eigen::Index i = 0; i < block.size(); ++i) {
        const double keep = block(i);
        block(i) = keep + h;
        const double up = objective(cfg, params, x, noise);
        block(i) = keep - h;
        const double dn = objective(cfg, params, x, noise);
        block(i) = keep;
        const double fd = (up - dn) / (2.0 * h);
        const double a = analytic(i);
        const double denom = std::max({std::abs(a), std::abs(fd), 1e-3});
        worst = std::max(worst, std::abs(a - fd) / denom);
      }
      report.blocks.push_back({bound_name(kind), params.names[b], worst});
      if (worst > report.threshold) report.pass = false;
    }
  }
  return report;
}

std::string format_report(const GradcheckReport& r) {
  std::ostringstream os;
  os.precision(3);
  for (const auto& b : r.blocks)
    os << b.bound << " " << b.block << " max_rel_err=" << std::scientific
       << b.max_rel_err << (b.max_rel_err <= r.threshold ? "" : "  <-- FAIL")
       << "\n";
  os << (r.pass ? "gradcheck PASS" : "gradcheck FAIL") << "\n";
  return os.str();
}

}  // namespace ivae
