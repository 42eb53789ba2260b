#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ivae/bounds.hpp"

namespace ivae {

enum class Activation { Elu, Relu };

struct ModelConfig {
  int input_dim = 784;
  std::vector<int> hidden = {200, 200};  // shared by encoder and decoder
  Activation activation = Activation::Elu;
  int latent_dim = 25;
  BoundConfig bound;
  double bias_init = 0.1;
};

// Architectures and hyperparameter presets, including optimizer rate and
// batch size, shipped as named configurations.
struct Preset {
  ModelConfig model;
  double learning_rate;
  int batch_size;
};
Preset preset_paper_ielbo();
Preset preset_paper_irelbo();

// Parameter store: flat list of matrices in a fixed, documented order:
//   enc.W1, enc.b1, ..., enc.Wmu, enc.bmu, enc.Wsig, enc.bsig,
//   dec.W1, dec.b1, ..., dec.Wmu, dec.bmu, dec.Wsig, dec.bsig
struct VaeParams {
  std::vector<std::string> names;
  std::vector<Mat> values;
};

// Xavier/Glorot uniform weights, constant biases. Deterministic per seed.
VaeParams init_params(const ModelConfig& cfg, std::uint64_t seed);

// Tracked (or constant, when tape is null) views of the parameters, in
// store order.
std::vector<Tensor> attach_params(const VaeParams& p, Tape* tape);

DiagGaussian encode(const ModelConfig& cfg, const std::vector<Tensor>& params,
                    const Tensor& x);
DiagGaussian decode(const ModelConfig& cfg, const std::vector<Tensor>& params,
                    const Tensor& z);

// Decoder-mean reconstruction through either the q-mean latent or one
// reparameterized sample.
enum class ReconMode { MeanOfQ, SampleOfQ };
Mat reconstruct(const ModelConfig& cfg, const VaeParams& p, const Mat& x,
                ReconMode mode, const Mat& noise);

}  // namespace ivae
