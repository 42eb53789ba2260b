#include "ivae/model.hpp"

#include <cmath>
#include <stdexcept>

#include "ivae/rng.hpp"

namespace ivae {

Preset preset_paper_ielbo() {
  ModelConfig m;
  m.input_dim = 784;
  m.hidden = {200, 200};
  m.activation = Activation::Elu;
  m.latent_dim = 25;
  m.bound = BoundConfig{BoundKind::Ielbo, 0.01, 1.5, 10};
  m.bias_init = 0.1;
  return Preset{m, 1e-4, 100};
}

Preset preset_paper_irelbo() {
  ModelConfig m;
  m.input_dim = 784;
  m.hidden = {400};
  m.activation = Activation::Relu;
  m.latent_dim = 20;
  // Full integration interval 1 => half-width 0.5.
  m.bound = BoundConfig{BoundKind::Irelbo, 0.5, 1.5, 1};
  m.bias_init = 0.0;
  return Preset{m, 5e-4, 100};
}

namespace {

void push_affine(VaeParams& p, const std::string& prefix, int out, int in,
                 double bias_init, std::mt19937_64& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> u(-r, r);
  Mat w(out, in);
  for (int i = 0; i < out; ++i)
    for (int j = 0; j < in; ++j) w(i, j) = u(rng);
  p.names.push_back(prefix + ".W");
  p.values.push_back(std::move(w));
  p.names.push_back(prefix + ".b");
  p.values.push_back(Mat::Constant(out, 1, bias_init));
}

Tensor activate(Activation a, const Tensor& t) {
  return a == Activation::Elu ? elu(t) : relu(t);
}

}  // namespace

VaeParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.input_dim < 1 || cfg.latent_dim < 1)
    throw std::invalid_argument("init_params: invalid dimensions");
  for (int h : cfg.hidden)
    if (h < 1) throw std::invalid_argument("init_params: invalid hidden width");
  std::mt19937_64 rng = make_rng(seed, rng_stream::kInit);
  VaeParams p;
  int in = cfg.input_dim;
  for (size_t i = 0; i < cfg.hidden.size(); ++i) {
    push_affine(p, "enc.h" + std::to_string(i + 1), cfg.hidden[i], in,
                cfg.bias_init, rng);
    in = cfg.hidden[i];
  }
  push_affine(p, "enc.mu", cfg.latent_dim, in, cfg.bias_init, rng);
  push_affine(p, "enc.logsigma", cfg.latent_dim, in, cfg.bias_init, rng);
  in = cfg.latent_dim;
  for (size_t i = 0; i < cfg.hidden.size(); ++i) {
    push_affine(p, "dec.h" + std::to_string(i + 1), cfg.hidden[i], in,
                cfg.bias_init, rng);
    in = cfg.hidden[i];
  }
  push_affine(p, "dec.mu", cfg.input_dim, in, cfg.bias_init, rng);
  push_affine(p, "dec.logsigma", cfg.input_dim, in, cfg.bias_init, rng);
  return p;
}

std::vector<Tensor> attach_params(const VaeParams& p, Tape* tape) {
  std::vector<Tensor> out;
  out.reserve(p.values.size());
  for (const Mat& m : p.values)
    out.push_back(tape ? tape->watch(m) : Tensor(m));
  return out;
}

namespace {

// Parameter layout offsets: encoder occupies the first
// 2*(hidden+2) entries, decoder the rest.
size_t half_size(const ModelConfig& cfg) {
  return 2 * (cfg.hidden.size() + 2);
}

DiagGaussian run_half(const ModelConfig& cfg, const std::vector<Tensor>& params,
                      size_t base, const Tensor& input, bool sigmoid_mean) {
  Tensor h = input;
  size_t k = base;
  for (size_t i = 0; i < cfg.hidden.size(); ++i) {
    h = activate(cfg.activation,
                 add_colwise(matmul(params[k], h), params[k + 1]));
    k += 2;
  }
  Tensor mu_aff = add_colwise(matmul(params[k], h), params[k + 1]);
  Tensor mu = sigmoid_mean ? sigmoid(mu_aff) : mu_aff;
  Tensor sg = exp(add_colwise(matmul(params[k + 2], h), params[k + 3]));
  return DiagGaussian{mu, sg};
}

}  // namespace

DiagGaussian encode(const ModelConfig& cfg, const std::vector<Tensor>& params,
                    const Tensor& x) {
  if (x.rows() != cfg.input_dim)
    throw std::invalid_argument("encode: input dimension mismatch");
  return run_half(cfg, params, 0, x, false);
}

DiagGaussian decode(const ModelConfig& cfg, const std::vector<Tensor>& params,
                    const Tensor& z) {
  if (z.rows() != cfg.latent_dim)
    throw std::invalid_argument("decode: latent dimension mismatch");
  return run_half(cfg, params, half_size(cfg), z, true);
}

Mat reconstruct(const ModelConfig& cfg, const VaeParams& p, const Mat& x,
                ReconMode mode, const Mat& noise) {
  std::vector<Tensor> params = attach_params(p, nullptr);
  DiagGaussian q = encode(cfg, params, Tensor(x));
  Tensor z = mode == ReconMode::MeanOfQ ? q.mu : sample_reparam(q, noise);
  return decode(cfg, params, z).mu.value();
}

}  // namespace ivae
