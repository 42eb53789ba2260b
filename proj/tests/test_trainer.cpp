#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ivae/gradcheck.hpp"
#include "ivae/train.hpp"

using namespace ivae;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

RunConfig small_run(const std::string& out) {
  RunConfig rc;
  rc.synth_count = 120;
  rc.synth_pixels = 16;
  rc.hidden = std::vector<int>{8};
  rc.latent_dim = 3;
  rc.mc_samples = 2;
  rc.batch_size = 20;
  rc.epochs = 2;
  rc.seed = 7;
  rc.out_dir = out;
  return rc;
}

size_t count_lines(const std::string& s) {
  size_t n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("resolve_run applies presets then explicit overrides") {
  RunConfig rc;
  ResolvedRun rr = resolve_run(rc, 100);
  CHECK(rr.model.input_dim == 100);
  CHECK(rr.model.bound.kind == BoundKind::Ielbo);  // paper-ielbo default
  CHECK(rr.model.hidden == std::vector<int>{200, 200});
  rc.preset = "paper-irelbo";
  rc.epsilon = 0.25;
  rc.latent_dim = 5;
  rr = resolve_run(rc, 100);
  CHECK(rr.model.bound.kind == BoundKind::Irelbo);
  CHECK(rr.model.bound.epsilon == 0.25);
  CHECK(rr.model.latent_dim == 5);
  CHECK(rr.model.hidden == std::vector<int>{400});
  CHECK(rr.lr == 5e-4);
  rc.preset = "nope";
  CHECK_THROWS_AS(resolve_run(rc, 100), std::invalid_argument);
}

TEST_CASE("load_split holds out a trailing tenth") {
  RunConfig rc;
  rc.synth_count = 100;
  rc.synth_pixels = 16;
  SplitData sd = load_split(rc);
  CHECK(sd.train.count() == 90);
  CHECK(sd.test.count() == 10);
  rc.subset = 50;
  sd = load_split(rc);
  CHECK(sd.train.count() == 45);
  CHECK(sd.test.count() == 5);
}

TEST_CASE("run_train writes metrics, timing, config and checkpoint") {
  const std::string out = "/tmp/ivae_trainer_t1";
  fs::remove_all(out);
  RunConfig rc = small_run(out);
  CHECK(run_train(rc) == 0);
  std::string csv = slurp(out + "/metrics.csv");
  CHECK(csv.rfind("epoch,train_bound,test_bound,train_recon,train_div,"
                  "sigma_frac_below_1e-3,nonfinite_flag\n",
                  0) == 0);
  CHECK(count_lines(csv) == 1 + 2);  // header + one row per epoch
  std::string timing = slurp(out + "/timing.csv");
  CHECK(timing.rfind("epoch,wall_seconds\n", 0) == 0);
  CHECK(count_lines(timing) == 1 + 2);
  CHECK(fs::exists(out + "/config.txt"));
  CHECK(fs::exists(out + "/checkpoint.bin"));
  std::string conf = slurp(out + "/config.txt");
  CHECK(conf.find("bound=ielbo") != std::string::npos);
  CHECK(conf.find("seed=7") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("metrics are byte-identical across reruns with the same seed") {
  const std::string a = "/tmp/ivae_trainer_det_a";
  const std::string b = "/tmp/ivae_trainer_det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  CHECK(run_train(small_run(a)) == 0);
  CHECK(run_train(small_run(b)) == 0);
  CHECK(slurp(a + "/metrics.csv") == slurp(b + "/metrics.csv"));
  // A different seed must change the metrics.
  RunConfig rc = small_run(b);
  rc.seed = 8;
  fs::remove_all(b);
  CHECK(run_train(rc) == 0);
  CHECK(slurp(a + "/metrics.csv") != slurp(b + "/metrics.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("run_eval reproduces the final logged train metrics") {
  const std::string out = "/tmp/ivae_trainer_eval";
  fs::remove_all(out);
  RunConfig rc = small_run(out);
  CHECK(run_train(rc) == 0);
  EvalOutput ev = run_eval(rc, out + "/checkpoint.bin");
  // Last metrics row: epoch 1.
  std::string csv = slurp(out + "/metrics.csv");
  const size_t pos = csv.rfind("\n1,");
  REQUIRE(pos != std::string::npos);
  std::istringstream row(csv.substr(pos + 3));
  std::string train_bound;
  std::getline(row, train_bound, ',');
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", ev.bound);
  CHECK(std::string(buf) == train_bound);
  fs::remove_all(out);
}

TEST_CASE("periodic checkpoints and histogram dumps appear on request") {
  const std::string out = "/tmp/ivae_trainer_ck";
  fs::remove_all(out);
  RunConfig rc = small_run(out);
  rc.checkpoint_every = 1;
  rc.dump_histograms = true;
  CHECK(run_train(rc) == 0);
  CHECK(fs::exists(out + "/checkpoint_epoch0.bin"));
  CHECK(fs::exists(out + "/checkpoint_epoch1.bin"));
  CHECK(fs::exists(out + "/histograms_epoch0.csv"));
  CHECK(fs::exists(out + "/histograms_epoch1.csv"));
  fs::remove_all(out);
}

TEST_CASE("run_reconstruct writes a PGM grid over the test split") {
  const std::string out = "/tmp/ivae_trainer_recon";
  fs::remove_all(out);
  RunConfig rc = small_run(out);
  CHECK(run_train(rc) == 0);
  std::string path = run_reconstruct(rc, out + "/checkpoint.bin", 6, 3);
  CHECK(path == out + "/reconstructions.pgm");
  std::string blob = slurp(path);
  // 4x4 images, 3 grid columns, 6 images -> 2 block rows of 3 tiers.
  CHECK(blob.rfind("P5\n12 24\n255\n", 0) == 0);
  fs::remove_all(out);
}

TEST_CASE("gradcheck passes for all bounds on the toy net") {
  GradcheckReport rep = run_gradcheck(0);
  CHECK(rep.pass);
  CHECK(rep.threshold == 1e-4);
  // 3 bounds x 12 parameter blocks of the 4-5-2 toy architecture.
  CHECK(rep.blocks.size() == 36);
  for (const auto& b : rep.blocks) CHECK(b.max_rel_err <= rep.threshold);
  std::string report = format_report(rep);
  CHECK(report.find("gradcheck PASS") != std::string::npos);
}

TEST_CASE("gradcheck detects a corrupted gradient block") {
  GradcheckReport rep =
      run_gradcheck(0, GradCorruption{"enc.h1.W", 1e-2});
  CHECK_FALSE(rep.pass);
  std::string report = format_report(rep);
  CHECK(report.find("gradcheck FAIL") != std::string::npos);
  CHECK(report.find("<-- FAIL") != std::string::npos);
}
