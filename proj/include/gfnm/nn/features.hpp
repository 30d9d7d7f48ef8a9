// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "gfnm/nn/network.hpp"
#include "gfnm/nn/train.hpp"
#include "gfnm/signal/frame.hpp"

namespace gfnm::nn {

/// kPerSlot feeds one slot per step (width 2N, J steps); kFullFrame feeds the
/// whole stacked observation as a single step (width 2NJ) and predicts all J
/// slots at once.
enum class InputMode { kPerSlot, kFullFrame };

const char* to_string(InputMode mode);
InputMode parse_input_mode(const std::string& text);

struct ArchitectureConfig {
  std::size_t width = 1000;
  std::size_t hidden_layers = 3;
  bool bidirectional = true;
  bool attention = true;
  std::size_t attention_span = 0;
  HeadMode head = HeadMode::kSigmoid;
  InputMode input = InputMode::kPerSlot;
};

NetworkShape network_shape(std::size_t num_devices, std::size_t subcarriers, std::size_t slots,
                           const ArchitectureConfig& arch);

/// Real parts then imaginary parts of each step's observation, divided by the
/// frame's RMS amplitude so that inputs are on a common scale across SNRs.
Matrix frame_input(const ReceivedFrame& frame, InputMode mode);

/// 0/1 activity labels, K_out × steps.
Matrix frame_labels(const ActivityFrame& activity, InputMode mode);

/// Per-slot probabilities (K × J) from the head output of frame_input.
Matrix per_slot_probabilities(const Matrix& head_output, std::size_t num_devices,
                              std::size_t slots, InputMode mode);

/// Frames drawn on demand from a generator, SNR uniform over [min, max].
class GeneratedSamples : public SampleSource {
 public:
  GeneratedSamples(const FrameGenerator& generator, std::size_t count, double snr_min_db,
                   double snr_max_db, InputMode mode, std::uint64_t first_index = 0)
      : generator_(generator),
        count_(count),
        snr_min_(snr_min_db),
        snr_max_(snr_max_db),
        mode_(mode),
        first_(first_index) {}

  std::size_t size() const override { return count_; }
  Sample sample(std::size_t index) const override;

 private:
  const FrameGenerator& generator_;
  std::size_t count_;
  double snr_min_;
  double snr_max_;
  InputMode mode_;
  std::uint64_t first_;
};

}  // namespace gfnm::nn
