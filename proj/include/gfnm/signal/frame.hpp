// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "gfnm/signal/activity.hpp"
#include "gfnm/signal/channel.hpp"
#include "gfnm/signal/codebook.hpp"
#include "gfnm/signal/modulation.hpp"

namespace gfnm {

/// Everything the transmitter side drew for one frame. Bits and symbols are
/// laid out J×K (×bits per symbol) and are zero for inactive devices.
struct FrameGroundTruth {
  ActivityFrame activity;
  ChannelRealization channel;
  std::size_t bits_per_symbol = 2;
  Bits bits;
  CVector symbols;

  std::span<const std::uint8_t> device_bits(std::size_t j, std::size_t k) const {
    return {bits.data() + (j * activity.num_devices + k) * bits_per_symbol, bits_per_symbol};
  }
  cplx symbol(std::size_t j, std::size_t k) const {
    return symbols[j * activity.num_devices + k];
  }
};

/// Stacked observation ỹ = ξx + w (slot-major: index j·N + n) with the noise
/// draw kept alongside so the synthesis can be re-derived exactly.
struct ReceivedFrame {
  std::size_t subcarriers = 0;
  std::size_t slots = 0;
  CVector observation;
  CVector noise;
  double noise_variance = 0.0;
  double snr_db = 0.0;
  FrameGroundTruth truth;

  std::span<const cplx> slot_observation(std::size_t j) const {
    return {observation.data() + j * subcarriers, subcarriers};
  }
};

/// Average received signal power per complex dimension,
/// (S / (N·K))·Σ_k ‖c_k‖²·var_k: the expectation of ‖ξx‖²/(NJ) over uniformly
/// placed supports, unit-energy symbols and the channel.
double nominal_signal_power(const SpreadingCodebook& codebook, std::span<const double> variances,
                            std::size_t sparsity);

/// σ² = P / 10^(snr_db/10).
double noise_variance_for_snr(double signal_power, double snr_db);

/// Uniform bits for every active (slot, device), J×K×bps layout.
Bits draw_bits(const ActivityFrame& activity, std::size_t bits_per_symbol, RngStream& stream);

/// The sparse vector x of length NJK, index (k·J + j)·N + n, holding s_k^[j]·g_k^[j]
/// for active (j, k) and zero elsewhere.
CVector sparse_vector(const FrameGroundTruth& truth);

/// Noise variance follows from snr_db and the codebook/channel statistics
/// (see nominal_signal_power); w ~ CN(0, σ²I) is drawn from `noise_stream`.
ReceivedFrame synthesize_frame(const SpreadingCodebook& codebook, ActivityFrame activity,
                               ChannelRealization channel, Bits bits,
                               const ModulationScheme& modulation, double snr_db,
                               RngStream& noise_stream);
ReceivedFrame synthesize_frame(const SpreadingCodebook& codebook, ActivityFrame activity,
                               ChannelRealization channel, Bits bits,
                               const ModulationScheme& modulation, double snr_db,
                               std::uint64_t seed);

/// Same, with an explicit noise variance (no SNR calibration).
ReceivedFrame synthesize_frame_with_noise(const SpreadingCodebook& codebook,
                                          ActivityFrame activity, ChannelRealization channel,
                                          Bits bits, const ModulationScheme& modulation,
                                          double noise_variance, RngStream& noise_stream);

struct SystemConfig {
  std::size_t num_devices = 200;
  std::size_t spreading_length = 100;
  std::size_t sparsity = 20;
  std::size_t slots = 7;
  double eta = 0.5;
  PathLossConfig path_loss;

  bool operator==(const SystemConfig&) const = default;
};

/// Throws ConfigError naming the offending field.
void validate(const SystemConfig& config);

/// Produces frames deterministically from (seed, frame index). The codebook
/// and path-loss geometry are fixed by the seed; every frame draws activity,
/// channel, bits and noise from its own derived streams, so frames can be
/// generated in any order or in parallel.
class FrameGenerator {
 public:
  FrameGenerator(SystemConfig config, std::uint64_t seed,
                 ModulationScheme modulation = ModulationScheme::qpsk());

  const SystemConfig& config() const noexcept { return config_; }
  const SpreadingCodebook& codebook() const noexcept { return codebook_; }
  const ModulationScheme& modulation() const noexcept { return modulation_; }
  std::uint64_t seed() const noexcept { return seed_; }

  double signal_power() const noexcept { return signal_power_; }
  double noise_variance(double snr_db) const {
    return noise_variance_for_snr(signal_power_, snr_db);
  }

  ReceivedFrame frame(std::uint64_t index, double snr_db) const;
  /// Frame whose SNR is drawn uniformly from [snr_min_db, snr_max_db].
  ReceivedFrame frame_random_snr(std::uint64_t index, double snr_min_db, double snr_max_db) const;

  RngStream frame_stream(std::uint64_t index) const;

 private:
  SystemConfig config_;
  std::uint64_t seed_;
  ModulationScheme modulation_;
  SpreadingCodebook codebook_;
  std::vector<double> variances_;
  double signal_power_;
};

}  // namespace gfnm
