#include "ivae/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace ivae {

namespace {

constexpr char kMagic[5] = {'I', 'V', 'A', 'E', '1'};

std::uint64_t fnv1a_str(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is)
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "checkpoint: truncated");
  return v;
}

void put_mat(std::ostream& os, const Mat& m) {
  put<std::int64_t>(os, m.rows());
  put<std::int64_t>(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Mat get_mat(std::istream& is) {
  const auto r = get<std::int64_t>(is);
  const auto c = get<std::int64_t>(is);
  if (r < 0 || c < 0 || r * c > (1ll << 28))
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "checkpoint: bad matrix extents");
  Mat m(r, c);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!is)
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "checkpoint: truncated matrix");
  return m;
}

}  // namespace

std::uint64_t config_digest(const ModelConfig& cfg) {
  std::ostringstream os;
  os << cfg.input_dim << '|' << cfg.latent_dim << '|'
     << (cfg.activation == Activation::Elu ? "elu" : "relu") << '|';
  for (int h : cfg.hidden) os << h << ',';
  os << '|' << static_cast<int>(cfg.bound.kind) << '|' << cfg.bound.epsilon
     << '|' << cfg.bound.alpha << '|' << cfg.bound.mc_samples << '|'
     << cfg.bias_init;
  return fnv1a_str(os.str());
}

void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                     int epoch, const VaeParams& params,
                     const AdamState& adam) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw CheckpointError(CheckpointError::Kind::Io,
                          "checkpoint: cannot write " + path);
  os.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(os, config_digest(cfg));
  put<std::int32_t>(os, epoch);
  put<std::int32_t>(os, static_cast<std::int32_t>(params.values.size()));
  for (const Mat& m : params.values) put_mat(os, m);
  put<std::int64_t>(os, adam.step);
  put<double>(os, adam.lr);
  put<double>(os, adam.beta1);
  put<double>(os, adam.beta2);
  put<double>(os, adam.eps);
  put<double>(os, adam.clip_norm);
  for (const Mat& m : adam.m) put_mat(os, m);
  for (const Mat& m : adam.v) put_mat(os, m);
}

Checkpoint load_checkpoint(const std::string& path, const ModelConfig& cfg) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw CheckpointError(CheckpointError::Kind::Io,
                          "checkpoint: cannot open " + path);
  char magic[5];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError(CheckpointError::Kind::Version,
                          "checkpoint: bad magic string");
  if (get<std::uint64_t>(is) != config_digest(cfg))
    throw CheckpointError(CheckpointError::Kind::ConfigMismatch,
                          "checkpoint: config digest mismatch");
  Checkpoint ck;
  ck.epoch = get<std::int32_t>(is);
  const auto n = get<std::int32_t>(is);
  // Rebuild names/shapes from a fresh init so the store order is checked.
  ck.params = init_params(cfg, 0);
  if (n != static_cast<std::int32_t>(ck.params.values.size()))
    throw CheckpointError(CheckpointError::Kind::ConfigMismatch,
                          "checkpoint: parameter count mismatch");
  for (Mat& m : ck.params.values) {
    Mat loaded = get_mat(is);
    if (loaded.rows() != m.rows() || loaded.cols() != m.cols())
      throw CheckpointError(CheckpointError::Kind::ConfigMismatch,
                            "checkpoint: parameter shape mismatch");
    m = std::move(loaded);
  }
  ck.adam.step = get<std::int64_t>(is);
  ck.adam.lr = get<double>(is);
  ck.adam.beta1 = get<double>(is);
  ck.adam.beta2 = get<double>(is);
  ck.adam.eps = get<double>(is);
  ck.adam.clip_norm = get<double>(is);
  for (size_t i = 0; i < ck.params.values.size(); ++i)
    ck.adam.m.push_back(get_mat(is));
  for (size_t i = 0; i < ck.params.values.size(); ++i)
    ck.adam.v.push_back(get_mat(is));
  return ck;
}

}  // namespace ivae
