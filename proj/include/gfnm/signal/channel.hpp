// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gfnm/numerics/rng.hpp"

namespace gfnm {

struct PathLossConfig {
  bool enabled = false;
  /// Per-device distances in km. When path loss is enabled and this is empty,
  /// distances are drawn uniformly from [min_distance_km, max_distance_km].
  std::vector<double> distances_km;
  double min_distance_km = 0.05;
  double max_distance_km = 1.0;

  bool operator==(const PathLossConfig&) const = default;
};

/// 128.1 + 37.6·log10(d) dB, d in km.
double path_loss_db(double distance_km);

/// Per-device channel power 10^(−PL/10), or 1 with path loss disabled.
std::vector<double> device_channel_variances(const PathLossConfig& config);

/// Resolves a config against K devices: validates distances and draws them
/// when they are not given.
PathLossConfig resolve_path_loss(PathLossConfig config, std::size_t num_devices,
                                 std::uint64_t seed);

/// Rayleigh block gains g[j][k][n] ~ CN(0, variance_k).
struct ChannelRealization {
  std::size_t slots = 0;
  std::size_t devices = 0;
  std::size_t subcarriers = 0;
  bool path_loss_enabled = false;
  std::vector<double> distances_km;
  std::vector<double> variances;
  std::vector<cplx> gains;

  cplx gain(std::size_t j, std::size_t k, std::size_t n) const {
    return gains[(j * devices + k) * subcarriers + n];
  }
  std::span<const cplx> vector(std::size_t j, std::size_t k) const {
    return {gains.data() + (j * devices + k) * subcarriers, subcarriers};
  }
  std::span<cplx> vector(std::size_t j, std::size_t k) {
    return {gains.data() + (j * devices + k) * subcarriers, subcarriers};
  }
};

/// `path_loss` must already be resolved when enabled (see resolve_path_loss);
/// an enabled config without distances is resolved from `stream`.
ChannelRealization generate_channel(std::size_t num_devices, std::size_t subcarriers,
                                    std::size_t slots, const PathLossConfig& path_loss,
                                    RngStream& stream);
ChannelRealization generate_channel(std::size_t num_devices, std::size_t subcarriers,
                                    std::size_t slots, const PathLossConfig& path_loss,
                                    std::uint64_t seed);

}  // namespace gfnm
