// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gfnm/nn/network.hpp"

namespace gfnm::nn {

/// Everything needed to resume training or run inference. `metadata` is an
/// opaque JSON document describing the data the model was trained on.
struct Checkpoint {
  NetworkParams params;
  AdamState optimizer;
  TrainConfig config;
  std::size_t completed_epochs = 0;
  std::string metadata = "{}";
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// "GFNC", version, shape, train config, optimizer scalars, then every
/// tensor as (name, rows, cols, values) in registration order: parameters,
/// running statistics, first moments, second moments.
std::vector<std::uint8_t> serialize(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws DataError on a malformed or truncated file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gfnm::nn
