// SPDX-License-Identifier: Apache-2.0
#include "gfnm/signal/activity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gfnm/errors.hpp"

namespace gfnm {

bool ActivityFrame::active(std::size_t slot, std::uint32_t device) const {
  const auto& s = supports.at(slot);
  return std::binary_search(s.begin(), s.end(), device);
}

std::vector<std::uint8_t> ActivityFrame::indicators() const {
  std::vector<std::uint8_t> delta(slots() * num_devices, 0);
  for (std::size_t j = 0; j < slots(); ++j)
    for (auto k : supports[j]) delta[j * num_devices + k] = 1;
  return delta;
}

std::size_t carried_over_count(double eta, std::size_t sparsity) {
  return static_cast<std::size_t>(std::floor(eta * static_cast<double>(sparsity) + 0.5));
}

ActivityFrame generate_activity(std::size_t num_devices, std::size_t sparsity, std::size_t slots,
                                double eta, RngStream& stream) {
  if (sparsity > num_devices) {
    throw ConfigError("generate_activity: S=" + std::to_string(sparsity) + " exceeds K=" +
                      std::to_string(num_devices));
  }
  if (slots == 0) throw ConfigError("generate_activity: J must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("generate_activity: eta must lie in [0, 1]");

  ActivityFrame frame;
  frame.num_devices = num_devices;
  frame.sparsity = sparsity;
  frame.configured_eta = eta;
  frame.supports.reserve(slots);

  const auto k_total = static_cast<std::uint32_t>(num_devices);
  const auto s = static_cast<std::uint32_t>(sparsity);
  const auto keep = static_cast<std::uint32_t>(carried_over_count(eta, sparsity));

  Support first = sample_without_replacement(stream, k_total, s);
  std::sort(first.begin(), first.end());
  frame.supports.push_back(std::move(first));

  // New devices come from outside the whole previous support, so the overlap
  // is exactly `keep`. A device dropped here may come back one slot later.
  // When K < 2S - keep there are not enough outsiders; the shortfall is then
  // drawn from the dropped devices and the overlap exceeds `keep`.
  std::vector<std::uint32_t> outside, dropped;
  outside.reserve(num_devices);
  for (std::size_t j = 1; j < slots; ++j) {
    const Support& prev = frame.supports.back();
    Support next = sample_from(stream, prev, keep);
    std::vector<std::uint8_t> mark(num_devices, 0);
    for (auto k : prev) mark[k] = 1;
    for (auto k : next) mark[k] = 2;
    outside.clear();
    dropped.clear();
    for (std::uint32_t k = 0; k < k_total; ++k) {
      if (mark[k] == 0) outside.push_back(k);
      if (mark[k] == 1) dropped.push_back(k);
    }
    const std::uint32_t need = s - keep;
    const auto from_outside = std::min<std::uint32_t>(need, static_cast<std::uint32_t>(outside.size()));
    const auto fresh = sample_from(stream, outside, from_outside);
    next.insert(next.end(), fresh.begin(), fresh.end());
    if (from_outside < need) {
      const auto back = sample_from(stream, dropped, need - from_outside);
      next.insert(next.end(), back.begin(), back.end());
    }
    std::sort(next.begin(), next.end());
    frame.supports.push_back(std::move(next));
  }
  return frame;
}

ActivityFrame generate_activity(std::size_t num_devices, std::size_t sparsity, std::size_t slots,
                                double eta, std::uint64_t seed) {
  RngStream stream(seed);
  return generate_activity(num_devices, sparsity, slots, eta, stream);
}

std::optional<double> temporal_correlation(std::span<const std::uint32_t> prev,
                                           std::span<const std::uint32_t> cur) {
  if (cur.empty()) return std::nullopt;
  std::size_t common = 0;
  for (auto k : cur)
    if (std::find(prev.begin(), prev.end(), k) != prev.end()) ++common;
  return static_cast<double>(common) / static_cast<double>(cur.size());
}

}  // namespace gfnm
