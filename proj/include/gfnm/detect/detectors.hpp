// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gfnm/nn/features.hpp"
#include "gfnm/nn/network.hpp"
#include "gfnm/signal/frame.hpp"

namespace gfnm::detect {

/// kOracleChannel equalizes detected devices with their true channels;
/// kBlind estimates each device's composite vector s·g without pilots
/// (experimental, see blind_mmse_detect).
enum class DataMode { kOracleChannel, kBlind };

const char* to_string(DataMode mode);
DataMode parse_data_mode(const std::string& text);

struct DetectorConfig {
  double threshold = 0.5;
  DataMode data_mode = DataMode::kOracleChannel;
};

/// Throws ConfigError unless 0 < threshold < 1.
void validate(const DetectorConfig& config);

/// Per-frame detector output. Bits are listed per slot in the order of that
/// slot's (sorted) support.
struct DetectionResult {
  std::vector<Support> supports;
  std::vector<std::size_t> sparsity;
  std::vector<std::vector<Bits>> bits;
  std::vector<CVector> symbols;  // equalized symbol per detected device
  nn::Matrix probabilities;      // K × J; empty for the non-learned detectors
  std::vector<std::vector<std::string>> flags;

  std::size_t slots() const noexcept { return supports.size(); }
  bool operator==(const DetectionResult&) const = default;
};

/// A trained activity-detection network and how frames are fed to it.
struct AudModel {
  nn::NetworkParams params;
  nn::TrainConfig config;
  nn::InputMode input = nn::InputMode::kPerSlot;
};

struct AudResult {
  std::vector<Support> supports;
  std::vector<std::size_t> sparsity;
  nn::Matrix probabilities;  // K × J
};

/// Υ̂ = {k : p̂_k ≥ τ} per slot; the softmax head compares p̂_k·K instead
/// (mass relative to uniform). Throws StateError when the network was built
/// for different (K, N, J).
AudResult aud_detect(const AudModel& model, const ReceivedFrame& frame,
                     const DetectorConfig& config);

struct DeviceBlock {
  std::size_t slot = 0;
  std::uint32_t device = 0;
  bool operator==(const DeviceBlock&) const = default;
};

/// Observation paired with the column blocks of ξ that belong to the
/// estimated supports. Blocks are kept in ξ's column order (device-major,
/// then slot), each represented by its diagonal c_k.
struct ReducedSystem {
  std::size_t subcarriers = 0;
  std::size_t slots = 0;
  CVector observation;
  std::vector<DeviceBlock> blocks;
  std::vector<CVector> diagonals;

  /// ξ_Υ̂ as an explicit NJ × N·|blocks| matrix.
  ComplexMatrix dense() const;
  /// Indices into `blocks` for one slot, in ascending device order.
  std::vector<std::size_t> slot_blocks(std::size_t slot) const;
};

ReducedSystem extract_sparse_signal(const ReceivedFrame& frame, const SpreadingCodebook& codebook,
                                    const std::vector<Support>& supports);

struct DataDetection {
  std::vector<std::vector<Bits>> bits;  // [slot][i], i over slot_blocks(slot)
  std::vector<CVector> symbols;         // same layout
  std::vector<std::vector<std::string>> flags;
};

/// Oracle-channel mode: per slot, ŝ = (HᴴH + σ²I)⁻¹Hᴴy with H = [c_k ⊙ g_k]
/// over the detected devices, then nearest-point demapping. Blind mode:
/// v̂_k = ridge estimate (weight σ²) of s_k·g_k on ξ_Υ̂, then each symbol is
/// decided from the coherent sum Σ_n v̂_k,n. A singular system retries with a
/// small ridge and records the flag "ridge-fallback".
DataDetection blind_mmse_detect(const ReducedSystem& system, double noise_variance,
                                DataMode mode, const FrameGroundTruth* truth,
                                const ModulationScheme& modulation);

/// Greedy state for one slot (ξ is block diagonal over slots, so the frame
/// residual is the concatenation of the per-slot ones).
struct OmpState {
  CVector residual;
  std::vector<std::uint32_t> selected;  // selection order
  std::size_t iterations = 0;
  std::vector<double> residual_norms;   // after each iteration, starting with ‖y‖
};

/// ‖ξ_kᴴ r‖² = Σ_n |c_nk|²|r_n|² for every device.
std::vector<double> omp_correlations(const SpreadingCodebook& codebook, std::span<const cplx> r);

/// Block OMP on one slot: `sparsity` iterations of argmax correlation
/// (ties to the lowest index), append, ridge re-solve (weight `reg`, minimum
/// norm when reg = 0) on the accumulated support, residual update.
OmpState omp_slot(std::span<const cplx> observation, const SpreadingCodebook& codebook,
                  std::size_t sparsity, double reg);

/// Ridge/minimum-norm estimate of the block coefficients on `support`
/// (N per device, device-major), exploiting the diagonal block structure.
CVector block_ridge_solve(std::span<const cplx> observation, const SpreadingCodebook& codebook,
                          std::span<const std::uint32_t> support, double reg);

/// Throws ConfigError when known_sparsity > K.
DetectionResult ls_omp_detect(const ReceivedFrame& frame, const SpreadingCodebook& codebook,
                              std::size_t known_sparsity, double noise_variance, DataMode mode,
                              const ModulationScheme& modulation);

/// Unregularized least squares on the true support with the true channels.
DetectionResult oracle_ls_detect(const ReceivedFrame& frame, const SpreadingCodebook& codebook,
                                 const ModulationScheme& modulation);

/// Network AUD followed by sparse-signal extraction and data detection.
DetectionResult proposed_detect(const AudModel& model, const ReceivedFrame& frame,
                                const SpreadingCodebook& codebook,
                                const ModulationScheme& modulation, const DetectorConfig& config);

/// Uniform interface for the evaluation harness.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string name() const = 0;
  virtual DetectionResult detect(const ReceivedFrame& frame) const = 0;
};

std::unique_ptr<Detector> make_network_detector(std::string name, std::shared_ptr<const AudModel> model,
                                                const SpreadingCodebook& codebook,
                                                const ModulationScheme& modulation,
                                                DetectorConfig config);
std::unique_ptr<Detector> make_ls_omp_detector(const SpreadingCodebook& codebook,
                                               const ModulationScheme& modulation,
                                               std::size_t known_sparsity, DataMode mode);
std::unique_ptr<Detector> make_oracle_ls_detector(const SpreadingCodebook& codebook,
                                                  const ModulationScheme& modulation);

}  // namespace gfnm::detect
