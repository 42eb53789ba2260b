#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ivae/tensor.hpp"

namespace ivae {

struct IdxError : std::runtime_error {
  enum class Kind { BadMagic, Truncated, Overflow };
  Kind kind;
  IdxError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Raw unsigned-byte 3-D IDX tensor (the MNIST distribution format).
struct RawIdx {
  int count = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> bytes;  // count * rows * cols, image-major
};

RawIdx load_idx(const std::string& path);

// Images as columns, every pixel in [0.001, 0.999].
struct Dataset {
  Mat pixels;  // n_pixels x count
  int rows = 0;
  int cols = 0;
  std::uint64_t source_digest = 0;
  Eigen::Index count() const { return pixels.cols(); }
  Eigen::Index n_pixels() const { return pixels.rows(); }
};

// Affine surjection byte -> [0.001, 0.999]: 0 -> 0.001, 255 -> 0.999.
Dataset rescale(const RawIdx& raw);

// Deterministic shuffled batch index plan keyed by (seed, epoch); the final
// short batch is included.
std::vector<std::vector<int>> batches(Eigen::Index count, int batch_size,
                                      std::uint64_t seed, int epoch);

// Synthetic dataset whose pixels concentrate near the two endpoints,
// mimicking the contrast profile of handwritten-digit data. Images are
// noisy copies of a small set of prototype patterns.
Dataset synth_high_contrast(int count, int n_pixels, std::uint64_t seed);

Dataset take_subset(const Dataset& ds, Eigen::Index offset, Eigen::Index n);

}  // namespace ivae
