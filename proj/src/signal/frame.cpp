// SPDX-License-Identifier: Apache-2.0
#include "gfnm/signal/frame.hpp"

#include <cmath>
#include <string>

#include "gfnm/errors.hpp"

namespace gfnm {

namespace {

// Stream domains under the generator seed.
constexpr std::uint64_t kCodebookDomain = 0xC0DEB00CULL;
constexpr std::uint64_t kGeometryDomain = 0x6E0ULL;
constexpr std::uint64_t kFrameDomain = 0xF4A3EULL;

enum FrameSubstream : std::uint64_t { kActivity = 1, kChannel = 2, kBits = 3, kNoise = 4, kSnr = 5 };

void check_shapes(const SpreadingCodebook& codebook, const ActivityFrame& activity,
                  const ChannelRealization& channel, const Bits& bits, std::size_t bps) {
  const std::size_t k_total = codebook.num_devices;
  const std::size_t n_len = codebook.spreading_length;
  const std::size_t slots = activity.slots();
  if (activity.num_devices != k_total || channel.devices != k_total) {
    throw InputError("synthesize_frame: device count mismatch between codebook (" +
                     std::to_string(k_total) + "), activity (" +
                     std::to_string(activity.num_devices) + ") and channel (" +
                     std::to_string(channel.devices) + ")");
  }
  if (channel.subcarriers != n_len) {
    throw InputError("synthesize_frame: channel has " + std::to_string(channel.subcarriers) +
                     " subcarriers, codebook N=" + std::to_string(n_len));
  }
  if (channel.slots != slots) {
    throw InputError("synthesize_frame: channel has " + std::to_string(channel.slots) +
                     " slots, activity J=" + std::to_string(slots));
  }
  if (bits.size() != slots * k_total * bps) {
    throw InputError("synthesize_frame: expected " + std::to_string(slots * k_total * bps) +
                     " bits (J×K×bps), got " + std::to_string(bits.size()));
  }
}

}  // namespace

double nominal_signal_power(const SpreadingCodebook& codebook, std::span<const double> variances,
                            std::size_t sparsity) {
  const std::size_t k_total = codebook.num_devices;
  double acc = 0.0;
  for (std::size_t k = 0; k < k_total; ++k) {
    double energy = 0.0;
    for (std::size_t n = 0; n < codebook.spreading_length; ++n)
      energy += std::norm(codebook.sequences(n, k));
    acc += energy * (variances.empty() ? 1.0 : variances[k]);
  }
  return static_cast<double>(sparsity) * acc /
         (static_cast<double>(codebook.spreading_length) * static_cast<double>(k_total));
}

double noise_variance_for_snr(double signal_power, double snr_db) {
  if (!std::isfinite(snr_db)) throw ConfigError("SNR must be finite");
  return signal_power / std::pow(10.0, snr_db / 10.0);
}

Bits draw_bits(const ActivityFrame& activity, std::size_t bits_per_symbol, RngStream& stream) {
  Bits bits(activity.slots() * activity.num_devices * bits_per_symbol, 0);
  for (std::size_t j = 0; j < activity.slots(); ++j)
    for (auto k : activity.supports[j])
      for (std::size_t b = 0; b < bits_per_symbol; ++b)
        bits[(j * activity.num_devices + k) * bits_per_symbol + b] =
            static_cast<std::uint8_t>(stream.next_u64() >> 63);
  return bits;
}

CVector sparse_vector(const FrameGroundTruth& truth) {
  const std::size_t slots = truth.activity.slots();
  const std::size_t k_total = truth.activity.num_devices;
  const std::size_t n_len = truth.channel.subcarriers;
  CVector x(n_len * slots * k_total);
  for (std::size_t j = 0; j < slots; ++j) {
    for (auto k : truth.activity.supports[j]) {
      const cplx s = truth.symbol(j, k);
      const auto g = truth.channel.vector(j, k);
      for (std::size_t n = 0; n < n_len; ++n) x[(k * slots + j) * n_len + n] = s * g[n];
    }
  }
  return x;
}

ReceivedFrame synthesize_frame_with_noise(const SpreadingCodebook& codebook,
                                          ActivityFrame activity, ChannelRealization channel,
                                          Bits bits, const ModulationScheme& modulation,
                                          double noise_variance, RngStream& noise_stream) {
  const std::size_t bps = modulation.bits_per_symbol();
  check_shapes(codebook, activity, channel, bits, bps);
  if (!(noise_variance >= 0.0)) throw InputError("synthesize_frame: negative noise variance");

  const std::size_t k_total = codebook.num_devices;
  const std::size_t n_len = codebook.spreading_length;
  const std::size_t slots = activity.slots();

  ReceivedFrame frame;
  frame.subcarriers = n_len;
  frame.slots = slots;
  frame.noise_variance = noise_variance;
  frame.truth.bits_per_symbol = bps;
  frame.truth.symbols.assign(slots * k_total, cplx{});
  for (std::size_t j = 0; j < slots; ++j)
    for (auto k : activity.supports[j])
      frame.truth.symbols[j * k_total + k] = modulation.map(
          std::span<const std::uint8_t>(bits.data() + (j * k_total + k) * bps, bps));

  frame.observation.assign(n_len * slots, cplx{});
  for (std::size_t j = 0; j < slots; ++j) {
    for (auto k : activity.supports[j]) {
      const cplx s = frame.truth.symbols[j * k_total + k];
      const auto g = channel.vector(j, k);
      for (std::size_t n = 0; n < n_len; ++n)
        frame.observation[j * n_len + n] += codebook.sequences(n, k) * g[n] * s;
    }
  }

  const double sigma = std::sqrt(noise_variance);
  frame.noise.resize(n_len * slots);
  for (std::size_t i = 0; i < frame.noise.size(); ++i) {
    frame.noise[i] = sigma * noise_stream.complex_normal();
    frame.observation[i] += frame.noise[i];
  }

  frame.truth.activity = std::move(activity);
  frame.truth.channel = std::move(channel);
  frame.truth.bits = std::move(bits);
  return frame;
}

ReceivedFrame synthesize_frame(const SpreadingCodebook& codebook, ActivityFrame activity,
                               ChannelRealization channel, Bits bits,
                               const ModulationScheme& modulation, double snr_db,
                               RngStream& noise_stream) {
  const double power =
      nominal_signal_power(codebook, channel.variances, activity.sparsity);
  auto frame = synthesize_frame_with_noise(codebook, std::move(activity), std::move(channel),
                                           std::move(bits), modulation,
                                           noise_variance_for_snr(power, snr_db), noise_stream);
  frame.snr_db = snr_db;
  return frame;
}

ReceivedFrame synthesize_frame(const SpreadingCodebook& codebook, ActivityFrame activity,
                               ChannelRealization channel, Bits bits,
                               const ModulationScheme& modulation, double snr_db,
                               std::uint64_t seed) {
  RngStream stream(seed);
  return synthesize_frame(codebook, std::move(activity), std::move(channel), std::move(bits),
                          modulation, snr_db, stream);
}

void validate(const SystemConfig& c) {
  if (c.num_devices == 0) throw ConfigError("K: must be >= 1");
  if (c.spreading_length == 0) throw ConfigError("N: must be >= 1");
  if (c.slots == 0) throw ConfigError("J: must be >= 1");
  if (c.sparsity > c.num_devices) {
    throw ConfigError("S: " + std::to_string(c.sparsity) + " exceeds K=" +
                      std::to_string(c.num_devices));
  }
  if (!(c.eta >= 0.0 && c.eta <= 1.0)) throw ConfigError("eta: must lie in [0, 1]");
}

FrameGenerator::FrameGenerator(SystemConfig config, std::uint64_t seed,
                               ModulationScheme modulation)
    : config_(std::move(config)), seed_(seed), modulation_(std::move(modulation)) {
  validate(config_);
  const auto alphabet = default_spreading_alphabet();
  RngStream root(seed_);
  codebook_ = generate_codebook(config_.num_devices, config_.spreading_length, alphabet,
                                root.derive(kCodebookDomain).next_u64());
  config_.path_loss = resolve_path_loss(config_.path_loss, config_.num_devices,
                                        root.derive(kGeometryDomain).next_u64());
  variances_ = config_.path_loss.enabled ? device_channel_variances(config_.path_loss)
                                         : std::vector<double>(config_.num_devices, 1.0);
  signal_power_ = nominal_signal_power(codebook_, variances_, config_.sparsity);
}

RngStream FrameGenerator::frame_stream(std::uint64_t index) const {
  return RngStream(seed_).derive(kFrameDomain).derive(index);
}

ReceivedFrame FrameGenerator::frame(std::uint64_t index, double snr_db) const {
  const RngStream fs = frame_stream(index);
  RngStream activity_stream = fs.derive(kActivity);
  RngStream channel_stream = fs.derive(kChannel);
  RngStream bit_stream = fs.derive(kBits);
  RngStream noise_stream = fs.derive(kNoise);

  auto activity = generate_activity(config_.num_devices, config_.sparsity, config_.slots,
                                    config_.eta, activity_stream);
  auto channel = generate_channel(config_.num_devices, config_.spreading_length, config_.slots,
                                  config_.path_loss, channel_stream);
  auto bits = draw_bits(activity, modulation_.bits_per_symbol(), bit_stream);
  auto frame = synthesize_frame_with_noise(codebook_, std::move(activity), std::move(channel),
                                           std::move(bits), modulation_, noise_variance(snr_db),
                                           noise_stream);
  frame.snr_db = snr_db;
  return frame;
}

ReceivedFrame FrameGenerator::frame_random_snr(std::uint64_t index, double snr_min_db,
                                               double snr_max_db) const {
  if (!(snr_max_db >= snr_min_db)) throw ConfigError("SNR range: max must be >= min");
  RngStream snr_stream = frame_stream(index).derive(kSnr);
  const double snr = snr_min_db + (snr_max_db - snr_min_db) * snr_stream.uniform();
  return frame(index, snr);
}

}  // namespace gfnm
