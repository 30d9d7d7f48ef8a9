// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gfnm/numerics/rng.hpp"

namespace gfnm {

using Support = std::vector<std::uint32_t>;

/// Burst-sparse activity over J slots. Supports are stored sorted.
struct ActivityFrame {
  std::size_t num_devices = 0;
  std::size_t sparsity = 0;
  double configured_eta = 0.0;
  std::vector<Support> supports;

  std::size_t slots() const noexcept { return supports.size(); }
  bool active(std::size_t slot, std::uint32_t device) const;
  /// δ as a J×K row-major 0/1 array.
  std::vector<std::uint8_t> indicators() const;
};

/// round(η·S) with ties rounded half-up.
std::size_t carried_over_count(double eta, std::size_t sparsity);

/// Slot 1 draws S devices uniformly without replacement. Each later slot keeps
/// round(η·S) devices drawn uniformly from the previous support and fills the
/// rest uniformly from the devices outside the previous support (from the
/// dropped ones only when fewer than S - round(η·S) outsiders exist).
ActivityFrame generate_activity(std::size_t num_devices, std::size_t sparsity, std::size_t slots,
                                double eta, RngStream& stream);
ActivityFrame generate_activity(std::size_t num_devices, std::size_t sparsity, std::size_t slots,
                                double eta, std::uint64_t seed);

/// |prev ∩ cur| / |cur|. Empty `cur` has no defined value and yields nullopt.
std::optional<double> temporal_correlation(std::span<const std::uint32_t> prev,
                                           std::span<const std::uint32_t> cur);

}  // namespace gfnm
