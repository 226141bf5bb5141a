#pragma once

#include <string>

#include "cst/net/model.hpp"

namespace cst::net {

/// Identity block stored in every checkpoint and verified by consumers.
struct CheckpointMeta {
  Sha256::Digest config_digest{};
  Sha256::Digest geometry_digest{};
  Sha256::Digest arch_digest{};
  Rng rng_state{0};
};

/// "CSTW" container: magic, version, the three digests, then named tensor
/// records (u32 name length, name, u32 rank, u32 dims, f64 payload,
/// little-endian) covering trainable parameters, BN running statistics,
/// standardisation statistics, RNG state, and the step counter.
void write_checkpoint(const std::string& path, Model& model, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  Model model;
  CheckpointMeta meta;
};
LoadedCheckpoint read_checkpoint(const std::string& path);

}  // namespace cst::net
