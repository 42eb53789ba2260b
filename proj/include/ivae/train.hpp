#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ivae/data.hpp"
#include "ivae/model.hpp"

namespace ivae {

// Fully resolved run description. Preset fields are applied first, explicit
// overrides win. Every run echoes its resolved settings to
// <out>/config.txt.
struct RunConfig {
  // data: an IDX file, or the synthetic generator when no path is given
  std::string data_path;
  std::string test_data_path;
  int synth_count = 1000;
  int synth_pixels = 784;

  std::string preset;  // "", "paper-ielbo", "paper-irelbo"
  std::optional<BoundKind> bound;
  std::optional<double> epsilon;  // interval HALF-width
  std::optional<double> alpha;
  std::optional<int> latent_dim;
  std::optional<std::vector<int>> hidden;
  std::optional<Activation> activation;
  std::optional<int> mc_samples;
  std::optional<double> bias_init;
  std::optional<double> lr;
  std::optional<int> batch_size;

  int epochs = 10;
  std::uint64_t seed = 0;
  int subset = 0;  // 0 keeps the full dataset
  std::string out_dir = "out";
  int checkpoint_every = 0;  // epochs between periodic checkpoints; 0 = final only
  double clip_norm = 0.0;    // optional max-norm clip; OFF by default
  bool dump_histograms = false;
};

struct ResolvedRun {
  ModelConfig model;
  double lr = 1e-4;
  int batch_size = 100;
};

// Resolution without data access; input_dim comes from the dataset.
ResolvedRun resolve_run(const RunConfig& cfg, int input_dim);

// Loads (or synthesizes) the dataset and applies --subset, then holds out
// the trailing tenth as the test split unless a test file is given.
struct SplitData {
  Dataset train;
  Dataset test;
};
SplitData load_split(const RunConfig& cfg);

// Trains, writing metrics.csv / timing.csv / config.txt / checkpoints under
// cfg.out_dir. Returns 0 on success, 2 on a non-finite abort (which leaves
// a diagnostic dump and a flagged final CSV row behind).
int run_train(const RunConfig& cfg);

struct EvalOutput {
  double bound = 0.0;
  double reconstruction = 0.0;
  double divergence = 0.0;
};
EvalOutput run_eval(const RunConfig& cfg, const std::string& checkpoint_path);

// Writes the original / mean-path / sample-path PGM grid for the first
// `count` test images (train images when the test split is empty).
std::string run_reconstruct(const RunConfig& cfg,
                            const std::string& checkpoint_path, int count,
                            int grid_cols);

}  // namespace ivae
