// SPDX-License-Identifier: Apache-2.0
#include "gfnm/nn/features.hpp"

#include <cmath>

#include "gfnm/errors.hpp"

namespace gfnm::nn {

using Eigen::Index;

const char* to_string(InputMode mode) {
  return mode == InputMode::kPerSlot ? "per-slot" : "full-frame";
}

InputMode parse_input_mode(const std::string& text) {
  if (text == "per-slot") return InputMode::kPerSlot;
  if (text == "full-frame") return InputMode::kFullFrame;
  throw ConfigError("input_mode: expected per-slot or full-frame, got '" + text + "'");
}

NetworkShape network_shape(std::size_t num_devices, std::size_t subcarriers, std::size_t slots,
                           const ArchitectureConfig& arch) {
  NetworkShape s;
  const bool per_slot = arch.input == InputMode::kPerSlot;
  s.input_width = per_slot ? 2 * subcarriers : 2 * subcarriers * slots;
  s.steps = per_slot ? slots : 1;
  s.slots_per_step = per_slot ? 1 : slots;
  s.width = arch.width;
  s.hidden_layers = arch.hidden_layers;
  s.devices = num_devices;
  s.bidirectional = arch.bidirectional;
  s.attention = arch.attention;
  s.attention_span = arch.attention_span;
  s.head = arch.head;
  validate(s);
  return s;
}

Matrix frame_input(const ReceivedFrame& frame, InputMode mode) {
  const std::size_t n = frame.subcarriers;
  const std::size_t j = frame.slots;
  if (frame.observation.size() != n * j) throw InputError("frame_input: observation length mismatch");
  double energy = 0.0;
  for (const cplx& y : frame.observation) energy += std::norm(y);
  const double rms = std::sqrt(energy / static_cast<double>(std::max<std::size_t>(n * j, 1)));
  const double scale = rms > 0.0 ? 1.0 / rms : 1.0;

  const std::size_t width = mode == InputMode::kPerSlot ? n : n * j;
  const std::size_t steps = mode == InputMode::kPerSlot ? j : 1;
  Matrix x(static_cast<Index>(2 * width), static_cast<Index>(steps));
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t i = 0; i < width; ++i) {
      const cplx y = frame.observation[t * width + i];
      x(static_cast<Index>(i), static_cast<Index>(t)) = y.real() * scale;
      x(static_cast<Index>(width + i), static_cast<Index>(t)) = y.imag() * scale;
    }
  return x;
}

Matrix frame_labels(const ActivityFrame& activity, InputMode mode) {
  const std::size_t k = activity.num_devices;
  const std::size_t j = activity.slots();
  Matrix labels = mode == InputMode::kPerSlot ? Matrix::Zero(static_cast<Index>(k), static_cast<Index>(j))
                                              : Matrix::Zero(static_cast<Index>(k * j), 1);
  for (std::size_t slot = 0; slot < j; ++slot)
    for (std::uint32_t dev : activity.supports[slot]) {
      if (mode == InputMode::kPerSlot)
        labels(dev, static_cast<Index>(slot)) = 1.0;
      else
        labels(static_cast<Index>(slot * k + dev), 0) = 1.0;
    }
  return labels;
}

Matrix per_slot_probabilities(const Matrix& head_output, std::size_t num_devices,
                              std::size_t slots, InputMode mode) {
  const auto k = static_cast<Index>(num_devices);
  const auto j = static_cast<Index>(slots);
  if (mode == InputMode::kPerSlot) {
    if (head_output.rows() != k || head_output.cols() != j)
      throw StateError("per_slot_probabilities: head output does not match K x J");
    return head_output;
  }
  if (head_output.rows() != k * j || head_output.cols() != 1)
    throw StateError("per_slot_probabilities: head output does not match KJ x 1");
  Matrix out(k, j);
  for (Index s = 0; s < j; ++s) out.col(s) = head_output.col(0).segment(s * k, k);
  return out;
}

Sample GeneratedSamples::sample(std::size_t index) const {
  const ReceivedFrame frame = generator_.frame_random_snr(first_ + index, snr_min_, snr_max_);
  return {frame_input(frame, mode_), frame_labels(frame.truth.activity, mode_)};
}

}  // namespace gfnm::nn
