#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ivae/model.hpp"

namespace ivae {

// Finite-difference verification of the full objective gradient on a
// reduced network (4 pixels, one 5-node hidden layer, 2 latents), for all
// three bounds.

struct GradcheckBlock {
  std::string bound;
  std::string block;
  double max_rel_err = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckBlock> blocks;
  bool pass = true;
  double threshold = 1e-4;
};

// Test hook: adds `delta` to every analytic gradient entry of the named
// block before comparison, to prove the checker detects corruption.
struct GradCorruption {
  std::string block;
  double delta;
};

GradcheckReport run_gradcheck(
    std::uint64_t seed,
    const std::optional<GradCorruption>& corrupt = std::nullopt);

std::string format_report(const GradcheckReport& r);

}  // namespace ivae
