#pragma once

#include <cstdint>
#include <random>

#include "ivae/tensor.hpp"

namespace ivae {

// RNG streams are split by purpose from the single run seed via fixed
// stream ids, so e.g. changing the MC sample count never perturbs the
// shuffle sequence.
namespace rng_stream {
inline constexpr std::uint32_t kInit = 0;
inline constexpr std::uint32_t kNoise = 1;
inline constexpr std::uint32_t kShuffle = 2;
inline constexpr std::uint32_t kTestEval = 3;
inline constexpr std::uint32_t kTrainEval = 4;
inline constexpr std::uint32_t kReconstruct = 5;
}  // namespace rng_stream

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream,
                                std::uint32_t sub = 0) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed),
                   static_cast<std::uint32_t>(seed >> 32), stream, sub};
  return std::mt19937_64(sq);
}

inline Mat normal_mat(std::mt19937_64& rng, Eigen::Index rows,
                      Eigen::Index cols) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

}  // namespace ivae
