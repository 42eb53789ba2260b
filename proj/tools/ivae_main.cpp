// Command-line front end: train / eval / reconstruct / gradcheck.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ivae/gradcheck.hpp"
#include "ivae/train.hpp"

namespace {

std::vector<int> parse_hidden(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

struct CliFlags {
  std::string bound, hidden, activation, preset;
  double epsilon = -1, alpha = -1, lr = -1, bias_init = -1;
  int latent_dim = -1, mc_samples = -1, batch_size = -1;
};

void add_common(CLI::App* app, ivae::RunConfig& rc, CliFlags& fl) {
  app->add_option("--data", rc.data_path, "IDX image file (omit for synthetic data)");
  app->add_option("--test-data", rc.test_data_path, "IDX test file (default: 10% holdout)");
  app->add_option("--synth-count", rc.synth_count, "synthetic image count");
  app->add_option("--synth-pixels", rc.synth_pixels, "synthetic pixels per image");
  app->add_option("--preset", fl.preset, "paper-ielbo | paper-irelbo");
  app->add_option("--bound", fl.bound, "elbo | ielbo | irelbo");
  app->add_option("--epsilon", fl.epsilon,
                  "interval HALF-width; the paper's 'integration interval' equals 2*epsilon");
  app->add_option("--alpha", fl.alpha, "Renyi order in (1,2)");
  app->add_option("--latent-dim", fl.latent_dim, "latent dimension");
  app->add_option("--hidden", fl.hidden, "hidden widths, e.g. 200,200");
  app->add_option("--activation", fl.activation, "elu | relu");
  app->add_option("--epochs", rc.epochs, "training epochs");
  app->add_option("--batch-size", fl.batch_size, "batch size");
  app->add_option("--lr", fl.lr, "Adam learning rate");
  app->add_option("--mc-samples", fl.mc_samples, "MC samples from q(z|x)");
  app->add_option("--bias-init", fl.bias_init, "bias initialization value");
  app->add_option("--seed", rc.seed, "run seed");
  app->add_option("--subset", rc.subset, "keep only the first N images");
  app->add_option("--out", rc.out_dir, "output directory");
  app->add_option("--clip-norm", rc.clip_norm, "max gradient norm (0 = off)");
  app->add_option("--checkpoint-every", rc.checkpoint_every,
                  "periodic checkpoint interval in epochs");
  app->add_flag("--dump-histograms", rc.dump_histograms,
                "write per-epoch histogram CSVs");
}

ivae::RunConfig finish(const ivae::RunConfig& base, const CliFlags& fl) {
  ivae::RunConfig rc = base;
  rc.preset = fl.preset;
  if (!fl.bound.empty()) {
    if (fl.bound == "elbo") rc.bound = ivae::BoundKind::Elbo;
    else if (fl.bound == "ielbo") rc.bound = ivae::BoundKind::Ielbo;
    else if (fl.bound == "irelbo") rc.bound = ivae::BoundKind::Irelbo;
    else throw CLI::ValidationError("--bound must be elbo|ielbo|irelbo");
  }
  if (!fl.activation.empty()) {
    if (fl.activation == "elu") rc.activation = ivae::Activation::Elu;
    else if (fl.activation == "relu") rc.activation = ivae::Activation::Relu;
    else throw CLI::ValidationError("--activation must be elu|relu");
  }
  if (!fl.hidden.empty()) rc.hidden = parse_hidden(fl.hidden);
  if (fl.epsilon >= 0) rc.epsilon = fl.epsilon;
  if (fl.alpha >= 0) rc.alpha = fl.alpha;
  if (fl.lr >= 0) rc.lr = fl.lr;
  if (fl.bias_init >= 0) rc.bias_init = fl.bias_init;
  if (fl.latent_dim >= 0) rc.latent_dim = fl.latent_dim;
  if (fl.mc_samples >= 0) rc.mc_samples = fl.mc_samples;
  if (fl.batch_size >= 0) rc.batch_size = fl.batch_size;
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interval-bound VAE trainer"};
  app.require_subcommand(1);

  ivae::RunConfig rc;
  CliFlags fl;
  std::string checkpoint_path;
  int recon_count = 30;
  int recon_cols = 10;
  std::uint64_t gradcheck_seed = 0;

  CLI::App* train = app.add_subcommand("train", "train a model");
  add_common(train, rc, fl);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, rc, fl);
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required();

  CLI::App* recon =
      app.add_subcommand("reconstruct", "write a PGM reconstruction grid");
  add_common(recon, rc, fl);
  recon->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required();
  recon->add_option("--count", recon_count, "number of images");
  recon->add_option("--columns", recon_cols, "grid columns");

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradcheck->add_option("--seed", gradcheck_seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      ivae::RunConfig cfg = finish(rc, fl);
      int rc_code = ivae::run_train(cfg);
      if (rc_code != 0)
        std::cerr << "training aborted; see " << cfg.out_dir
                  << "/diagnostic.txt\n";
      return rc_code;
    }
    if (eval->parsed()) {
      ivae::EvalOutput out = ivae::run_eval(finish(rc, fl), checkpoint_path);
      std::printf("bound=%.17g\nreconstruction=%.17g\ndivergence=%.17g\n",
                  out.bound, out.reconstruction, out.divergence);
      return 0;
    }
    if (recon->parsed()) {
      std::string path = ivae::run_reconstruct(finish(rc, fl),
                                               checkpoint_path, recon_count,
                                               recon_cols);
      std::printf("wrote %s\n", path.c_str());
      return 0;
    }
    if (gradcheck->parsed()) {
      ivae::GradcheckReport rep = ivae::run_gradcheck(gradcheck_seed);
      std::cout << ivae::format_report(rep);
      return rep.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
