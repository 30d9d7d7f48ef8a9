// SPDX-License-Identifier: Apache-2.0
#include "gfnm/eval/metrics.hpp"

#include <algorithm>

#include "gfnm/errors.hpp"

namespace gfnm::eval {

namespace {

bool contains(std::span<const std::uint32_t> set, std::uint32_t k) {
  return std::find(set.begin(), set.end(), k) != set.end();
}

std::size_t overlap(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  std::size_t n = 0;
  for (std::uint32_t k : a) n += contains(b, k);
  return n;
}

std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

}  // namespace

double detection_probability(std::span<const std::uint32_t> active,
                             std::span<const std::uint32_t> detected) {
  if (active.empty()) throw InputError("detection_probability: no active devices");
  return static_cast<double>(overlap(active, detected)) / static_cast<double>(active.size());
}

double identification_accuracy(std::span<const std::uint32_t> active,
                               std::span<const std::uint32_t> estimated, std::size_t sparsity) {
  if (sparsity == 0) throw InputError("identification_accuracy: S = 0");
  return 100.0 * static_cast<double>(overlap(active, estimated)) / static_cast<double>(sparsity);
}

BitErrorCount count_bit_errors(const FrameGroundTruth& truth, std::size_t slot,
                               std::span<const std::uint32_t> estimated,
                               std::span<const Bits> decoded, const ModulationScheme& modulation,
                               bool rotation_invariant) {
  if (decoded.size() != estimated.size())
    throw InputError("count_bit_errors: one decoded word per detected device required");
  const std::size_t bps = truth.bits_per_symbol;
  const Support& active = truth.activity.supports.at(slot);
  BitErrorCount c;
  for (std::uint32_t k : active)
    if (!contains(estimated, k)) {
      c.errors += bps;
      c.total += bps;
    }
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    const std::uint32_t k = estimated[i];
    if (decoded[i].size() != bps) throw InputError("count_bit_errors: decoded word has wrong length");
    c.total += bps;
    if (!contains(active, k)) {
      c.errors += bps;
      continue;
    }
    const auto tx = truth.device_bits(slot, k);
    std::size_t e = hamming(tx, decoded[i]);
    if (rotation_invariant) {
      cplx z = modulation.map(decoded[i]);
      for (int r = 1; r < 4; ++r) {
        z *= cplx(0.0, 1.0);
        e = std::min(e, hamming(tx, modulation.demap(z)));
      }
    }
    c.errors += e;
  }
  return c;
}

double bit_error_rate(const FrameGroundTruth& truth, std::size_t slot,
                      std::span<const std::uint32_t> estimated, std::span<const Bits> decoded,
                      const ModulationScheme& modulation) {
  return count_bit_errors(truth, slot, estimated, decoded, modulation).rate();
}

FrameMetrics frame_metrics(const ReceivedFrame& frame, const detect::DetectionResult& result,
                           const ModulationScheme& modulation, bool rotation_invariant) {
  const ActivityFrame& activity = frame.truth.activity;
  if (result.slots() != activity.slots())
    throw InputError("frame_metrics: detection result has the wrong slot count");
  std::size_t hits = 0, active = 0, false_alarms = 0, inactive = 0;
  BitErrorCount bits;
  for (std::size_t s = 0; s < activity.slots(); ++s) {
    const Support& g = activity.supports[s];
    const Support& est = result.supports[s];
    const std::size_t h = overlap(g, est);
    hits += h;
    active += g.size();
    false_alarms += est.size() - h;
    inactive += activity.num_devices - g.size();
    bits += count_bit_errors(frame.truth, s, est, result.bits[s], modulation, rotation_invariant);
  }
  if (active == 0) throw InputError("frame_metrics: frame has no active devices");
  FrameMetrics m;
  m.rho_d = static_cast<double>(hits) / static_cast<double>(active);
  m.accuracy = 100.0 * m.rho_d;
  m.ber = bits.rate();
  m.false_alarm = inactive == 0 ? 0.0 : static_cast<double>(false_alarms) / static_cast<double>(inactive);
  m.bit_errors = bits.errors;
  m.bits = bits.total;
  return m;
}

}  // namespace gfnm::eval
