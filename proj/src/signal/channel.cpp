// SPDX-License-Identifier: Apache-2.0
#include "gfnm/signal/channel.hpp"

#include <cmath>
#include <string>

#include "gfnm/errors.hpp"

namespace gfnm {

double path_loss_db(double distance_km) {
  if (!(distance_km > 0.0)) throw ConfigError("path_loss_db: distance must be positive");
  return 128.1 + 37.6 * std::log10(distance_km);
}

std::vector<double> device_channel_variances(const PathLossConfig& config) {
  std::vector<double> v;
  v.reserve(config.distances_km.size());
  for (double d : config.distances_km)
    v.push_back(config.enabled ? std::pow(10.0, -path_loss_db(d) / 10.0) : 1.0);
  return v;
}

namespace {

void draw_distances(PathLossConfig& config, std::size_t num_devices, RngStream& stream) {
  if (!(config.min_distance_km > 0.0) || !(config.max_distance_km >= config.min_distance_km)) {
    throw ConfigError("path loss: distance range must satisfy 0 < min <= max");
  }
  config.distances_km.resize(num_devices);
  const double span = config.max_distance_km - config.min_distance_km;
  for (auto& d : config.distances_km) d = config.min_distance_km + span * stream.uniform();
}

void check_distances(const PathLossConfig& config, std::size_t num_devices) {
  if (config.distances_km.size() != num_devices) {
    throw ConfigError("path loss: " + std::to_string(config.distances_km.size()) +
                      " distances given for " + std::to_string(num_devices) + " devices");
  }
  for (std::size_t k = 0; k < num_devices; ++k) {
    if (!(config.distances_km[k] > 0.0)) {
      throw ConfigError("path loss: distance of device " + std::to_string(k) +
                        " must be positive");
    }
  }
}

}  // namespace

PathLossConfig resolve_path_loss(PathLossConfig config, std::size_t num_devices,
                                 std::uint64_t seed) {
  if (!config.enabled) {
    config.distances_km.clear();
    return config;
  }
  if (config.distances_km.empty()) {
    RngStream stream(seed);
    draw_distances(config, num_devices, stream);
  }
  check_distances(config, num_devices);
  return config;
}

ChannelRealization generate_channel(std::size_t num_devices, std::size_t subcarriers,
                                    std::size_t slots, const PathLossConfig& path_loss,
                                    RngStream& stream) {
  ChannelRealization ch;
  ch.slots = slots;
  ch.devices = num_devices;
  ch.subcarriers = subcarriers;
  ch.path_loss_enabled = path_loss.enabled;
  ch.variances.assign(num_devices, 1.0);
  if (path_loss.enabled) {
    PathLossConfig resolved = path_loss;
    if (resolved.distances_km.empty()) draw_distances(resolved, num_devices, stream);
    check_distances(resolved, num_devices);
    ch.distances_km = resolved.distances_km;
    resolved.enabled = true;
    ch.variances = device_channel_variances(resolved);
  }

  ch.gains.resize(slots * num_devices * subcarriers);
  for (std::size_t j = 0; j < slots; ++j) {
    for (std::size_t k = 0; k < num_devices; ++k) {
      const double amplitude = std::sqrt(ch.variances[k]);
      for (auto& g : ch.vector(j, k)) g = amplitude * stream.complex_normal();
    }
  }
  return ch;
}

ChannelRealization generate_channel(std::size_t num_devices, std::size_t subcarriers,
                                    std::size_t slots, const PathLossConfig& path_loss,
                                    std::uint64_t seed) {
  RngStream stream(seed);
  return generate_channel(num_devices, subcarriers, slots, path_loss, stream);
}

}  // namespace gfnm
