#pragma once

#include <cstdint>
#include <string>

#include "ivae/adam.hpp"
#include "ivae/model.hpp"

namespace ivae {

struct CheckpointError : std::runtime_error {
  enum class Kind { Io, Version, ConfigMismatch, Corrupt };
  Kind kind;
  CheckpointError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
};

// Digest of the model-shape-relevant configuration; a checkpoint only loads
// against a config with the same digest.
std::uint64_t config_digest(const ModelConfig& cfg);

// Versioned binary blob: magic "IVAE1", config digest, epoch, parameter
// arrays (raw 64-bit little-endian, store order), then optimizer state.
void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                     int epoch, const VaeParams& params,
                     const AdamState& adam);

struct Checkpoint {
  int epoch = 0;
  VaeParams params;
  AdamState adam;
};

Checkpoint load_checkpoint(const std::string& path, const ModelConfig& cfg);

}  // namespace ivae
