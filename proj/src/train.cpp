#include "ivae/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ivae/adam.hpp"
#include "ivae/checkpoint.hpp"
#include "ivae/diagnostics.hpp"
#include "ivae/pgm.hpp"
#include "ivae/rng.hpp"

namespace ivae {

namespace {

namespace fs = std::filesystem;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* bound_name(BoundKind k) {
  switch (k) {
    case BoundKind::Elbo: return "elbo";
    case BoundKind::Ielbo: return "ielbo";
    case BoundKind::Irelbo: return "irelbo";
  }
  return "?";
}

Mat gather(const Dataset& ds, const std::vector<int>& idx) {
  Mat x(ds.n_pixels(), static_cast<Eigen::Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) x.col(Eigen::Index(j)) = ds.pixels.col(idx[j]);
  return x;
}

struct PassResult {
  double bound = 0.0;
  double recon = 0.0;
  double div = 0.0;
};

// Full sequential pass without gradients; MC noise comes from a stream
// keyed by (seed, stream, epoch) so the pass is reproducible on its own.
PassResult eval_pass(const ModelConfig& mc, const VaeParams& params,
                     const Dataset& ds, int batch_size, std::uint64_t seed,
                     std::uint32_t stream, int epoch,
                     DecoderStats* stats = nullptr) {
  std::mt19937_64 rng = make_rng(seed, stream, static_cast<std::uint32_t>(epoch));
  std::vector<Tensor> pt = attach_params(params, nullptr);
  PassResult r;
  const Eigen::Index count = ds.count();
  for (Eigen::Index at = 0; at < count; at += batch_size) {
    const Eigen::Index b = std::min<Eigen::Index>(batch_size, count - at);
    Mat x = ds.pixels.middleCols(at, b);
    std::vector<Mat> noise;
    for (int s = 0; s < mc.bound.mc_samples; ++s)
      noise.push_back(normal_mat(rng, mc.latent_dim, b));
    DiagGaussian q = encode(mc, pt, Tensor(x));
    auto dec = [&](const Tensor& z) {
      DiagGaussian d = decode(mc, pt, z);
      if (stats) stats->observe(d);
      return d;
    };
    BoundTerms t = evaluate_bound(x, q, dec, mc.bound, noise);
    const double w = static_cast<double>(b);
    r.bound += w * t.total;
    r.recon += w * t.reconstruction;
    r.div += w * t.divergence;
  }
  const double n = static_cast<double>(count);
  r.bound /= n;
  r.recon /= n;
  r.div /= n;
  return r;
}

void write_config_echo(const RunConfig& cfg, const ResolvedRun& rr,
                       const SplitData& data, const std::string& path) {
  std::ofstream os(path);
  os << "preset=" << (cfg.preset.empty() ? "none" : cfg.preset) << "\n";
  os << "data=" << (cfg.data_path.empty() ? "synthetic" : cfg.data_path) << "\n";
  os << "test_data=" << (cfg.test_data_path.empty() ? "split" : cfg.test_data_path) << "\n";
  os << "train_count=" << data.train.count() << "\n";
  os << "test_count=" << data.test.count() << "\n";
  os << "input_dim=" << rr.model.input_dim << "\n";
  os << "bound=" << bound_name(rr.model.bound.kind) << "\n";
  os << "epsilon=" << fmt17(rr.model.bound.epsilon) << "\n";
  os << "alpha=" << fmt17(rr.model.bound.alpha) << "\n";
  os << "mc_samples=" << rr.model.bound.mc_samples << "\n";
  os << "latent_dim=" << rr.model.latent_dim << "\n";
  os << "hidden=";
  for (size_t i = 0; i < rr.model.hidden.size(); ++i)
    os << (i ? "," : "") << rr.model.hidden[i];
  os << "\n";
  os << "activation=" << (rr.model.activation == Activation::Elu ? "elu" : "relu") << "\n";
  os << "bias_init=" << fmt17(rr.model.bias_init) << "\n";
  os << "lr=" << fmt17(rr.lr) << "\n";
  os << "batch_size=" << rr.batch_size << "\n";
  os << "epochs=" << cfg.epochs << "\n";
  os << "seed=" << cfg.seed << "\n";
  os << "subset=" << cfg.subset << "\n";
  os << "clip_norm=" << fmt17(cfg.clip_norm) << "\n";
  os << "checkpoint_every=" << cfg.checkpoint_every << "\n";
}

void write_diagnostic_dump(const std::string& path, int epoch, int batch,
                           const BoundTerms& terms, const std::string& why) {
  std::ofstream os(path);
  os << "non-finite abort\n";
  os << "reason=" << why << "\n";
  os << "epoch=" << epoch << "\nbatch=" << batch << "\n";
  os << "total=" << fmt17(terms.total) << "\n";
  os << "reconstruction=" << fmt17(terms.reconstruction) << "\n";
  os << "divergence=" << fmt17(terms.divergence) << "\n";
  UnbalanceRecord u = record_terms(terms, epoch);
  os << "abs_ratio=" << fmt17(u.ratio) << "\n";
}

}  // namespace

ResolvedRun resolve_run(const RunConfig& cfg, int input_dim) {
  Preset base;
  if (cfg.preset == "paper-ielbo" || cfg.preset.empty()) {
    base = preset_paper_ielbo();
  } else if (cfg.preset == "paper-irelbo") {
    base = preset_paper_irelbo();
  } else {
    throw std::invalid_argument("unknown preset: " + cfg.preset);
  }
  ResolvedRun rr{base.model, base.learning_rate, base.batch_size};
  rr.model.input_dim = input_dim;
  if (cfg.bound) rr.model.bound.kind = *cfg.bound;
  if (cfg.epsilon) rr.model.bound.epsilon = *cfg.epsilon;
  if (cfg.alpha) rr.model.bound.alpha = *cfg.alpha;
  if (cfg.mc_samples) rr.model.bound.mc_samples = *cfg.mc_samples;
  if (cfg.latent_dim) rr.model.latent_dim = *cfg.latent_dim;
  if (cfg.hidden) rr.model.hidden = *cfg.hidden;
  if (cfg.activation) rr.model.activation = *cfg.activation;
  if (cfg.bias_init) rr.model.bias_init = *cfg.bias_init;
  if (cfg.lr) rr.lr = *cfg.lr;
  if (cfg.batch_size) rr.batch_size = *cfg.batch_size;
  return rr;
}

SplitData load_split(const RunConfig& cfg) {
  Dataset all = cfg.data_path.empty()
                    ? synth_high_contrast(cfg.synth_count, cfg.synth_pixels,
                                          cfg.seed ^ 0x9e3779b97f4a7c15ull)
                    : rescale(load_idx(cfg.data_path));
  if (cfg.subset > 0 && cfg.subset < all.count())
    all = take_subset(all, 0, cfg.subset);
  SplitData sd;
  if (!cfg.test_data_path.empty()) {
    sd.train = std::move(all);
    sd.test = rescale(load_idx(cfg.test_data_path));
    return sd;
  }
  const Eigen::Index n_test = std::max<Eigen::Index>(1, all.count() / 10);
  if (all.count() <= n_test) {
    sd.train = all;
    sd.test = all;
    return sd;
  }
  sd.train = take_subset(all, 0, all.count() - n_test);
  sd.test = take_subset(all, all.count() - n_test, n_test);
  return sd;
}

int run_train(const RunConfig& cfg) {
  SplitData data = load_split(cfg);
  ResolvedRun rr = resolve_run(cfg, static_cast<int>(data.train.n_pixels()));
  const ModelConfig& mc = rr.model;

  fs::create_directories(cfg.out_dir);
  write_config_echo(cfg, rr, data, cfg.out_dir + "/config.txt");

  VaeParams params = init_params(mc, cfg.seed);
  AdamState adam(params, rr.lr);
  adam.clip_norm = cfg.clip_norm;
  std::mt19937_64 noise_rng = make_rng(cfg.seed, rng_stream::kNoise);

  std::ofstream csv(cfg.out_dir + "/metrics.csv");
  csv << "epoch,train_bound,test_bound,train_recon,train_div,"
         "sigma_frac_below_1e-3,nonfinite_flag\n";
  std::ofstream timing(cfg.out_dir + "/timing.csv");
  timing << "epoch,wall_seconds\n";

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    auto plan = batches(data.train.count(), rr.batch_size, cfg.seed, epoch);
    int batch_index = 0;
    for (const auto& idx : plan) {
      Mat x = gather(data.train, idx);
      std::vector<Mat> noise;
      for (int s = 0; s < mc.bound.mc_samples; ++s)
        noise.push_back(
            normal_mat(noise_rng, mc.latent_dim, Eigen::Index(idx.size())));
      Tape tape;
      std::vector<Tensor> pt = attach_params(params, &tape);
      DiagGaussian q = encode(mc, pt, Tensor(x));
      auto dec = [&](const Tensor& z) { return decode(mc, pt, z); };
      BoundTerms terms = evaluate_bound(x, q, dec, mc.bound, noise);
      if (!std::isfinite(terms.total)) {
        write_diagnostic_dump(cfg.out_dir + "/diagnostic.txt", epoch,
                              batch_index, terms, "non-finite bound value");
        csv << epoch << ",nan,nan," << fmt17(terms.reconstruction) << ","
            << fmt17(terms.divergence) << ",nan,1\n";
        return 2;
      }
      tape.backward(neg(terms.objective));
      std::vector<Mat> grads;
      grads.reserve(pt.size());
      for (const Tensor& t : pt) grads.push_back(tape.grad(t));
      try {
        adam_step(adam, params, grads);
      } catch (const NonFiniteGradient& e) {
        write_diagnostic_dump(cfg.out_dir + "/diagnostic.txt", epoch,
                              batch_index, terms, e.what());
        csv << epoch << ",nan,nan," << fmt17(terms.reconstruction) << ","
            << fmt17(terms.divergence) << ",nan,1\n";
        return 2;
      }
      ++batch_index;
    }

    DecoderStats stats;
    PassResult train_m =
        eval_pass(mc, params, data.train, rr.batch_size, cfg.seed,
                  rng_stream::kTrainEval, epoch, &stats);
    PassResult test_m = eval_pass(mc, params, data.test, rr.batch_size,
                                  cfg.seed, rng_stream::kTestEval, epoch);
    const bool finite = std::isfinite(train_m.bound) &&
                        std::isfinite(test_m.bound);
    csv << epoch << "," << fmt17(train_m.bound) << "," << fmt17(test_m.bound)
        << "," << fmt17(train_m.recon) << "," << fmt17(train_m.div) << ","
        << fmt17(stats.sigma.fraction_below(1e-3)) << ","
        << (finite ? 0 : 1) << "\n";
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    timing << epoch << "," << fmt17(secs) << "\n";
    if (cfg.dump_histograms) {
      std::ofstream hs(cfg.out_dir + "/histograms_epoch" +
                       std::to_string(epoch) + ".csv");
      hs << histogram_csv(stats);
    }
    if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0)
      save_checkpoint(cfg.out_dir + "/checkpoint_epoch" +
                          std::to_string(epoch) + ".bin",
                      mc, epoch, params, adam);
    if (!finite) {
      BoundTerms t;
      t.total = train_m.bound;
      t.reconstruction = train_m.recon;
      t.divergence = train_m.div;
      write_diagnostic_dump(cfg.out_dir + "/diagnostic.txt", epoch, -1, t,
                            "non-finite epoch metric");
      return 2;
    }
  }
  save_checkpoint(cfg.out_dir + "/checkpoint.bin", mc, cfg.epochs - 1, params,
                  adam);
  return 0;
}

EvalOutput run_eval(const RunConfig& cfg, const std::string& checkpoint_path) {
  SplitData data = load_split(cfg);
  ResolvedRun rr = resolve_run(cfg, static_cast<int>(data.train.n_pixels()));
  Checkpoint ck = load_checkpoint(checkpoint_path, rr.model);
  PassResult r = eval_pass(rr.model, ck.params, data.train, rr.batch_size,
                           cfg.seed, rng_stream::kTrainEval, ck.epoch);
  return EvalOutput{r.bound, r.recon, r.div};
}

std::string run_reconstruct(const RunConfig& cfg,
                            const std::string& checkpoint_path, int count,
                            int grid_cols) {
  SplitData data = load_split(cfg);
  ResolvedRun rr = resolve_run(cfg, static_cast<int>(data.train.n_pixels()));
  Checkpoint ck = load_checkpoint(checkpoint_path, rr.model);
  const Dataset& src = data.test.count() > 0 ? data.test : data.train;
  count = static_cast<int>(std::min<Eigen::Index>(count, src.count()));
  Mat x = src.pixels.leftCols(count);
  std::mt19937_64 rng = make_rng(cfg.seed, rng_stream::kReconstruct);
  Mat noise = normal_mat(rng, rr.model.latent_dim, count);
  Mat mean_path =
      reconstruct(rr.model, ck.params, x, ReconMode::MeanOfQ, noise);
  Mat sample_path =
      reconstruct(rr.model, ck.params, x, ReconMode::SampleOfQ, noise);
  ReconGrid grid = make_recon_grid(x, mean_path, sample_path, src.rows,
                                   src.cols, grid_cols);
  fs::create_directories(cfg.out_dir);
  const std::string path = cfg.out_dir + "/reconstructions.pgm";
  write_pgm(path, grid.width, grid.height, grid.pixels);
  return path;
}

}  // namespace ivae
