// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "gfnm/detect/detectors.hpp"

namespace gfnm::eval {

/// Fraction of Γ that was detected (decoded output present). False alarms do
/// not enter; see false_alarm_rate. Throws InputError when Γ is empty.
double detection_probability(std::span<const std::uint32_t> active,
                             std::span<const std::uint32_t> detected);

/// 100·|Γ ∩ Υ̂| / S. Throws InputError when S = 0.
double identification_accuracy(std::span<const std::uint32_t> active,
                               std::span<const std::uint32_t> estimated, std::size_t sparsity);

struct BitErrorCount {
  std::size_t errors = 0;
  std::size_t total = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(total); }
  BitErrorCount& operator+=(const BitErrorCount& o) {
    errors += o.errors;
    total += o.total;
    return *this;
  }
};

/// One slot. Every bit of a missed device and of a falsely detected device
/// counts as an error; the denominator is the bits of Γ ∪ Υ̂. With
/// `rotation_invariant`, each decoded symbol of a correctly detected device
/// is scored against the best of the constellation's 90° rotations.
BitErrorCount count_bit_errors(const FrameGroundTruth& truth, std::size_t slot,
                               std::span<const std::uint32_t> estimated,
                               std::span<const Bits> decoded, const ModulationScheme& modulation,
                               bool rotation_invariant = false);

/// Empty Υ̂ on a non-empty Γ gives 1.
double bit_error_rate(const FrameGroundTruth& truth, std::size_t slot,
                      std::span<const std::uint32_t> estimated, std::span<const Bits> decoded,
                      const ModulationScheme& modulation);

/// Per-frame summary pooled over slots.
struct FrameMetrics {
  double rho_d = 0.0;
  double accuracy = 0.0;
  double ber = 0.0;
  double false_alarm = 0.0;  // |Υ̂ \ Γ| / (K − S), pooled over slots
  std::size_t bit_errors = 0;
  std::size_t bits = 0;
};

FrameMetrics frame_metrics(const ReceivedFrame& frame, const detect::DetectionResult& result,
                           const ModulationScheme& modulation, bool rotation_invariant = false);

}  // namespace gfnm::eval
