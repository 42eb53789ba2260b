#include "ivae/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ivae/rng.hpp"

namespace ivae {

namespace {

std::uint64_t fnv1a(const std::uint8_t* p, size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

}  // namespace

RawIdx load_idx(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw IdxError(IdxError::Kind::Truncated, "idx: cannot open " + path);
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 16)
    throw IdxError(IdxError::Kind::Truncated, "idx: truncated header");
  if (read_be32(buf.data()) != 0x00000803u)
    throw IdxError(IdxError::Kind::BadMagic,
                   "idx: bad magic (expected unsigned-byte 3-D tensor)");
  const std::uint32_t count = read_be32(buf.data() + 4);
  const std::uint32_t rows = read_be32(buf.data() + 8);
  const std::uint32_t cols = read_be32(buf.data() + 12);
  if (count == 0 || rows == 0 || cols == 0 || rows > 65536 || cols > 65536 ||
      static_cast<std::uint64_t>(count) * rows * cols > (1ull << 33))
    throw IdxError(IdxError::Kind::Overflow, "idx: dimension overflow");
  const std::uint64_t payload = std::uint64_t(count) * rows * cols;
  if (buf.size() - 16 < payload)
    throw IdxError(IdxError::Kind::Truncated, "idx: truncated payload");
  RawIdx r;
  r.count = static_cast<int>(count);
  r.rows = static_cast<int>(rows);
  r.cols = static_cast<int>(cols);
  r.bytes.assign(buf.begin() + 16, buf.begin() + 16 + payload);
  return r;
}

Dataset rescale(const RawIdx& raw) {
  Dataset ds;
  ds.rows = raw.rows;
  ds.cols = raw.cols;
  const Eigen::Index n = Eigen::Index(raw.rows) * raw.cols;
  ds.pixels.resize(n, raw.count);
  for (int i = 0; i < raw.count; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      ds.pixels(j, i) =
          0.001 + raw.bytes[size_t(i) * n + size_t(j)] * (0.998 / 255.0);
  ds.source_digest = fnv1a(raw.bytes.data(), raw.bytes.size());
  return ds;
}

std::vector<std::vector<int>> batches(Eigen::Index count, int batch_size,
                                      std::uint64_t seed, int epoch) {
  if (batch_size < 1)
    throw std::invalid_argument("batches: batch size must be >= 1");
  std::vector<int> order(static_cast<size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng =
      make_rng(seed, rng_stream::kShuffle, static_cast<std::uint32_t>(epoch));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> out;
  for (size_t i = 0; i < order.size(); i += static_cast<size_t>(batch_size)) {
    size_t end = std::min(order.size(), i + static_cast<size_t>(batch_size));
    out.emplace_back(order.begin() + i, order.begin() + end);
  }
  return out;
}

Dataset synth_high_contrast(int count, int n_pixels, std::uint64_t seed) {
  if (count < 1 || n_pixels < 1)
    throw std::invalid_argument("synth_high_contrast: count, n_pixels >= 1");
  std::mt19937_64 rng = make_rng(seed, rng_stream::kInit, 0x5d5d);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.01);

  const int n_proto = std::min(10, count);
  std::vector<std::vector<bool>> protos(static_cast<size_t>(n_proto));
  for (auto& pr : protos) {
    pr.resize(static_cast<size_t>(n_pixels));
    for (int j = 0; j < n_pixels; ++j) pr[size_t(j)] = u(rng) < 0.35;
  }

  Dataset ds;
  const int side = static_cast<int>(std::lround(std::sqrt(double(n_pixels))));
  if (side * side == n_pixels) {
    ds.rows = side;
    ds.cols = side;
  } else {
    ds.rows = 1;
    ds.cols = n_pixels;
  }
  ds.pixels.resize(n_pixels, count);
  std::uniform_int_distribution<int> pick(0, n_proto - 1);
  for (int i = 0; i < count; ++i) {
    const auto& pr = protos[static_cast<size_t>(pick(rng))];
    for (int j = 0; j < n_pixels; ++j) {
      const bool on = pr[size_t(j)];
      const double in = std::abs(jitter(rng));  // pushes inward from the edge
      const double v = on ? 0.999 - in : 0.001 + in;
      ds.pixels(j, i) = std::clamp(v, 0.001, 0.999);
    }
  }
  ds.source_digest = seed;
  return ds;
}

Dataset take_subset(const Dataset& ds, Eigen::Index offset, Eigen::Index n) {
  if (offset < 0 || n < 1 || offset + n > ds.count())
    throw std::invalid_argument("take_subset: range out of bounds");
  Dataset out;
  out.rows = ds.rows;
  out.cols = ds.cols;
  out.pixels = ds.pixels.middleCols(offset, n);
  out.source_digest = ds.source_digest ^ (std::uint64_t(offset) << 32) ^
                      std::uint64_t(n);
  return out;
}

}  // namespace ivae
