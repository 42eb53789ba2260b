#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "ivae/data.hpp"

using namespace ivae;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/ivae_test_") + name;
}

void write_idx(const std::string& path, int count, int rows, int cols,
               const std::vector<std::uint8_t>& payload,
               std::uint32_t magic = 0x00000803u, bool truncate = false) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  auto be32 = [&](std::uint32_t v) {
    const std::uint8_t b[4] = {std::uint8_t(v >> 24), std::uint8_t(v >> 16),
                               std::uint8_t(v >> 8), std::uint8_t(v)};
    f.write(reinterpret_cast<const char*>(b), 4);
  };
  be32(magic);
  be32(std::uint32_t(count));
  be32(std::uint32_t(rows));
  be32(std::uint32_t(cols));
  size_t n = payload.size();
  if (truncate) n /= 2;
  f.write(reinterpret_cast<const char*>(payload.data()),
          static_cast<std::streamsize>(n));
}

}  // namespace

TEST_CASE("load_idx round trip and rescale endpoints") {
  const std::string path = temp_path("ok.idx");
  std::vector<std::uint8_t> payload;
  for (int i = 0; i < 2 * 2 * 3; ++i)
    payload.push_back(std::uint8_t((i * 47) % 256));
  payload[0] = 0;
  payload[1] = 255;
  write_idx(path, 2, 2, 3, payload);
  RawIdx raw = load_idx(path);
  CHECK(raw.count == 2);
  CHECK(raw.rows == 2);
  CHECK(raw.cols == 3);
  CHECK(raw.bytes == payload);
  Dataset ds = rescale(raw);
  CHECK(ds.count() == 2);
  CHECK(ds.n_pixels() == 6);
  CHECK(ds.pixels(0, 0) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(ds.pixels(1, 0) == doctest::Approx(0.999).epsilon(1e-12));
  CHECK((ds.pixels.array() >= 0.001).all());
  CHECK((ds.pixels.array() <= 0.999).all());
  CHECK(ds.source_digest != 0);
  std::remove(path.c_str());
}

TEST_CASE("load_idx error taxonomy") {
  const std::string bad_magic = temp_path("badmagic.idx");
  write_idx(bad_magic, 1, 2, 2, std::vector<std::uint8_t>(4, 0), 0x00000801u);
  try {
    load_idx(bad_magic);
    FAIL("expected BadMagic");
  } catch (const IdxError& e) {
    CHECK(e.kind == IdxError::Kind::BadMagic);
  }

  const std::string trunc = temp_path("trunc.idx");
  write_idx(trunc, 1, 4, 4, std::vector<std::uint8_t>(16, 0), 0x00000803u,
            true);
  try {
    load_idx(trunc);
    FAIL("expected Truncated");
  } catch (const IdxError& e) {
    CHECK(e.kind == IdxError::Kind::Truncated);
  }

  const std::string huge = temp_path("huge.idx");
  write_idx(huge, 1 << 30, 65536, 65536, std::vector<std::uint8_t>(4, 0));
  try {
    load_idx(huge);
    FAIL("expected Overflow");
  } catch (const IdxError& e) {
    CHECK(e.kind == IdxError::Kind::Overflow);
  }

  try {
    load_idx("/nonexistent/nope.idx");
    FAIL("expected Truncated for unopenable file");
  } catch (const IdxError& e) {
    CHECK(e.kind == IdxError::Kind::Truncated);
  }
  std::remove(bad_magic.c_str());
  std::remove(trunc.c_str());
  std::remove(huge.c_str());
}

TEST_CASE("batches partition every index exactly once") {
  auto plan = batches(103, 10, 7, 0);
  CHECK(plan.size() == 11);
  CHECK(plan.back().size() == 3);
  std::set<int> seen;
  for (const auto& b : plan)
    for (int i : b) CHECK(seen.insert(i).second);
  CHECK(seen.size() == 103);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 102);
}

TEST_CASE("batches are deterministic per (seed, epoch) and shuffled") {
  auto a = batches(50, 7, 11, 3);
  auto b = batches(50, 7, 11, 3);
  CHECK(a == b);
  auto c = batches(50, 7, 11, 4);
  CHECK(a != c);
  auto d = batches(50, 7, 12, 3);
  CHECK(a != d);
  std::vector<int> flat;
  for (const auto& bt : a) flat.insert(flat.end(), bt.begin(), bt.end());
  std::vector<int> sorted = flat;
  std::sort(sorted.begin(), sorted.end());
  CHECK(flat != sorted);  // actually shuffled
  CHECK_THROWS_AS(batches(10, 0, 1, 0), std::invalid_argument);
}

TEST_CASE("synthetic dataset is high-contrast and deterministic") {
  Dataset a = synth_high_contrast(200, 64, 5);
  Dataset b = synth_high_contrast(200, 64, 5);
  CHECK((a.pixels - b.pixels).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.count() == 200);
  CHECK(a.n_pixels() == 64);
  CHECK(a.rows == 8);
  CHECK(a.cols == 8);
  CHECK((a.pixels.array() >= 0.001).all());
  CHECK((a.pixels.array() <= 0.999).all());
  // Mass concentrates near the endpoints: the defining property of the
  // datasets that trigger sigma collapse.
  Eigen::Index near_edge = 0;
  for (Eigen::Index i = 0; i < a.pixels.size(); ++i) {
    const double v = a.pixels(i);
    if (v < 0.05 || v > 0.95) ++near_edge;
  }
  CHECK(double(near_edge) / double(a.pixels.size()) > 0.95);
  // Both endpoints are represented.
  CHECK(a.pixels.minCoeff() < 0.05);
  CHECK(a.pixels.maxCoeff() > 0.95);
  Dataset c = synth_high_contrast(200, 64, 6);
  CHECK((a.pixels - c.pixels).cwiseAbs().maxCoeff() > 0.0);
  // Non-square pixel counts degrade to a 1 x n layout.
  Dataset d = synth_high_contrast(3, 10, 1);
  CHECK(d.rows == 1);
  CHECK(d.cols == 10);
  CHECK_THROWS_AS(synth_high_contrast(0, 4, 1), std::invalid_argument);
}

TEST_CASE("take_subset slices columns and validates bounds") {
  Dataset ds = synth_high_contrast(20, 16, 2);
  Dataset sub = take_subset(ds, 5, 10);
  CHECK(sub.count() == 10);
  CHECK(sub.n_pixels() == 16);
  CHECK((sub.pixels.col(0) - ds.pixels.col(5)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sub.pixels.col(9) - ds.pixels.col(14)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sub.source_digest != ds.source_digest);
  CHECK_THROWS_AS(take_subset(ds, 15, 10), std::invalid_argument);
  CHECK_THROWS_AS(take_subset(ds, -1, 5), std::invalid_argument);
  CHECK_THROWS_AS(take_subset(ds, 0, 0), std::invalid_argument);
}
