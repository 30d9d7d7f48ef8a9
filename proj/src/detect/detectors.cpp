// SPDX-License-Identifier: Apache-2.0
#include "gfnm/detect/detectors.hpp"

#include <algorithm>
#include <cmath>

#include "gfnm/errors.hpp"
#include "gfnm/numerics/linalg.hpp"

namespace gfnm::detect {

namespace {

constexpr const char* kRidgeFallback = "ridge-fallback";
constexpr const char* kRankDeficient = "rank-deficient";
constexpr const char* kEmptySupport = "empty-support";

// Solve (HᴴH + reg·I)ŝ = Hᴴy; on a failed factorization retry once with a
// ridge scaled to the largest diagonal of HᴴH.
CVector equalize(const ComplexMatrix& h, std::span<const cplx> y, double reg,
                 std::vector<std::string>& flags) {
  try {
    return regularized_normal_solve(h, y, reg);
  } catch (const DecompositionError&) {
    double diag = 0.0;
    for (std::size_t c = 0; c < h.cols(); ++c) {
      double col = 0.0;
      for (std::size_t r = 0; r < h.rows(); ++r) col += std::norm(h(r, c));
      diag = std::max(diag, col);
    }
    flags.emplace_back(kRidgeFallback);
    return regularized_normal_solve(h, y, std::max({10.0 * reg, 1e-8 * diag, 1e-12}));
  }
}

ComplexMatrix effective_channel(const SpreadingCodebook& codebook, const ChannelRealization& channel,
                                std::size_t slot, std::span<const std::uint32_t> devices) {
  const std::size_t n = codebook.spreading_length;
  ComplexMatrix h(n, devices.size());
  for (std::size_t i = 0; i < devices.size(); ++i)
    for (std::size_t r = 0; r < n; ++r)
      h(r, i) = codebook.entry(r, devices[i]) * channel.gain(slot, devices[i], r);
  return h;
}

// Ridge fit of y over diagonal blocks: with D_n = Σ_i |d_i,n|², the solution
// is v_i,n = conj(d_i,n)·y_n / (D_n + reg) and the residual y_n·reg/(D_n + reg).
template <typename Entry>
CVector diagonal_ridge(std::span<const cplx> y, std::size_t count, double reg, Entry entry,
                       CVector* residual) {
  const std::size_t n = y.size();
  CVector v(count * n);
  if (residual) residual->assign(y.begin(), y.end());
  for (std::size_t r = 0; r < n; ++r) {
    double d = 0.0;
    for (std::size_t i = 0; i < count; ++i) d += std::norm(entry(i, r));
    const double denom = d + reg;
    if (!(denom > 0.0)) continue;  // no block touches this subcarrier
    for (std::size_t i = 0; i < count; ++i) v[i * n + r] = std::conj(entry(i, r)) * y[r] / denom;
    if (residual) (*residual)[r] = y[r] * (reg / denom);
  }
  return v;
}

DetectionResult assemble(std::vector<Support> supports, DataDetection data) {
  DetectionResult out;
  out.sparsity.reserve(supports.size());
  for (const auto& s : supports) out.sparsity.push_back(s.size());
  out.supports = std::move(supports);
  out.bits = std::move(data.bits);
  out.symbols = std::move(data.symbols);
  out.flags = std::move(data.flags);
  return out;
}

DataDetection detect_data(const ReceivedFrame& frame, const SpreadingCodebook& codebook,
                          const std::vector<Support>& supports, double noise_variance,
                          DataMode mode, const ModulationScheme& modulation) {
  return blind_mmse_detect(extract_sparse_signal(frame, codebook, supports), noise_variance, mode,
                           &frame.truth, modulation);
}

}  // namespace

const char* to_string(DataMode mode) {
  return mode == DataMode::kOracleChannel ? "oracle-channel" : "blind";
}

DataMode parse_data_mode(const std::string& text) {
  if (text == "oracle-channel") return DataMode::kOracleChannel;
  if (text == "blind") return DataMode::kBlind;
  throw ConfigError("data_mode: expected oracle-channel or blind, got '" + text + "'");
}

void validate(const DetectorConfig& config) {
  if (!(config.threshold > 0.0 && config.threshold < 1.0))
    throw ConfigError("threshold: must lie strictly between 0 and 1");
}

AudResult aud_detect(const AudModel& model, const ReceivedFrame& frame,
                     const DetectorConfig& config) {
  validate(config);
  const nn::NetworkShape& shape = model.params.shape;
  const std::size_t k = frame.truth.activity.num_devices;
  const std::size_t n = frame.subcarriers;
  const std::size_t j = frame.slots;
  const bool per_slot = model.input == nn::InputMode::kPerSlot;
  const bool fits = shape.devices == k && shape.input_width == (per_slot ? 2 * n : 2 * n * j) &&
                    shape.steps == (per_slot ? j : 1) && shape.slots_per_step == (per_slot ? 1 : j);
  if (!fits)
    throw StateError("aud_detect: network was built for a different (K, N, J) or input mode");

  const nn::Matrix head = nn::predict(nn::frame_input(frame, model.input), model.params, model.config);
  AudResult out;
  out.probabilities = nn::per_slot_probabilities(head, k, j, model.input);
  const double scale = shape.head == nn::HeadMode::kSoftmax ? static_cast<double>(k) : 1.0;
  out.supports.resize(j);
  for (std::size_t s = 0; s < j; ++s) {
    for (std::size_t d = 0; d < k; ++d)
      if (out.probabilities(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(s)) * scale >=
          config.threshold)
        out.supports[s].push_back(static_cast<std::uint32_t>(d));
    out.sparsity.push_back(out.supports[s].size());
  }
  return out;
}

ComplexMatrix ReducedSystem::dense() const {
  ComplexMatrix m(subcarriers * slots, subcarriers * blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (std::size_t r = 0; r < subcarriers; ++r)
      m(blocks[b].slot * subcarriers + r, b * subcarriers + r) = diagonals[b][r];
  return m;
}

std::vector<std::size_t> ReducedSystem::slot_blocks(std::size_t slot) const {
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    if (blocks[b].slot == slot) out.push_back(b);
  return out;
}

ReducedSystem extract_sparse_signal(const ReceivedFrame& frame, const SpreadingCodebook& codebook,
                                    const std::vector<Support>& supports) {
  const std::size_t k = codebook.num_devices;
  const std::size_t j = frame.slots;
  if (supports.size() != j) throw InputError("extract_sparse_signal: one support per slot required");
  if (codebook.spreading_length != frame.subcarriers)
    throw InputError("extract_sparse_signal: codebook length differs from frame subcarriers");
  std::vector<std::uint8_t> member(k * j, 0);
  for (std::size_t s = 0; s < j; ++s)
    for (std::uint32_t d : supports[s]) {
      if (d >= k) throw InputError("extract_sparse_signal: device index out of range");
      member[d * j + s] = 1;
    }
  ReducedSystem out;
  out.subcarriers = frame.subcarriers;
  out.slots = j;
  out.observation = frame.observation;
  for (std::size_t d = 0; d < k; ++d)
    for (std::size_t s = 0; s < j; ++s)
      if (member[d * j + s]) {
        out.blocks.push_back({s, static_cast<std::uint32_t>(d)});
        out.diagonals.push_back(codebook.sequence(d));
      }
  return out;
}

DataDetection blind_mmse_detect(const ReducedSystem& system, double noise_variance, DataMode mode,
                                const FrameGroundTruth* truth, const ModulationScheme& modulation) {
  if (!(noise_variance >= 0.0)) throw InputError("blind_mmse_detect: negative noise variance");
  if (mode == DataMode::kOracleChannel && truth == nullptr)
    throw InputError("blind_mmse_detect: oracle-channel mode needs the true channels");
  const std::size_t n = system.subcarriers;
  DataDetection out;
  out.bits.resize(system.slots);
  out.symbols.resize(system.slots);
  out.flags.resize(system.slots);
  for (std::size_t s = 0; s < system.slots; ++s) {
    const std::vector<std::size_t> idx = system.slot_blocks(s);
    if (idx.empty()) {
      out.flags[s].emplace_back(kEmptySupport);
      continue;
    }
    const std::span<const cplx> y(system.observation.data() + s * n, n);
    CVector symbols(idx.size());
    if (mode == DataMode::kOracleChannel) {
      ComplexMatrix h(n, idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const std::uint32_t dev = system.blocks[idx[i]].device;
        for (std::size_t r = 0; r < n; ++r)
          h(r, i) = system.diagonals[idx[i]][r] * truth->channel.gain(s, dev, r);
      }
      symbols = equalize(h, y, noise_variance, out.flags[s]);
    } else {
      const CVector v = diagonal_ridge(
          y, idx.size(), noise_variance,
          [&](std::size_t i, std::size_t r) { return system.diagonals[idx[i]][r]; }, nullptr);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        cplx z{0.0, 0.0};
        for (std::size_t r = 0; r < n; ++r) z += v[i * n + r];
        symbols[i] = z;
      }
    }
    out.bits[s].reserve(idx.size());
    for (const cplx& z : symbols) out.bits[s].push_back(modulation.demap(z));
    out.symbols[s] = std::move(symbols);
  }
  return out;
}

std::vector<double> omp_correlations(const SpreadingCodebook& codebook, std::span<const cplx> r) {
  if (r.size() != codebook.spreading_length) throw InputError("omp_correlations: length mismatch");
  std::vector<double> out(codebook.num_devices, 0.0);
  for (std::size_t n = 0; n < r.size(); ++n) {
    const double e = std::norm(r[n]);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += std::norm(codebook.entry(n, k)) * e;
  }
  return out;
}

CVector block_ridge_solve(std::span<const cplx> observation, const SpreadingCodebook& codebook,
                          std::span<const std::uint32_t> support, double reg) {
  if (observation.size() != codebook.spreading_length)
    throw InputError("block_ridge_solve: length mismatch");
  return diagonal_ridge(
      observation, support.size(), reg,
      [&](std::size_t i, std::size_t r) { return codebook.entry(r, support[i]); }, nullptr);
}

OmpState omp_slot(std::span<const cplx> observation, const SpreadingCodebook& codebook,
                  std::size_t sparsity, double reg) {
  if (sparsity > codebook.num_devices) throw ConfigError("known_sparsity: exceeds device count");
  if (!(reg >= 0.0)) throw InputError("omp_slot: negative regularization");
  OmpState st;
  st.residual.assign(observation.begin(), observation.end());
  st.residual_norms.push_back(norm(st.residual));
  std::vector<std::uint8_t> taken(codebook.num_devices, 0);
  for (std::size_t it = 0; it < sparsity; ++it) {
    const std::vector<double> corr = omp_correlations(codebook, st.residual);
    std::size_t best = codebook.num_devices;
    for (std::size_t k = 0; k < corr.size(); ++k)
      if (!taken[k] && (best == codebook.num_devices || corr[k] > corr[best])) best = k;
    taken[best] = 1;
    st.selected.push_back(static_cast<std::uint32_t>(best));
    diagonal_ridge(
        observation, st.selected.size(), reg,
        [&](std::size_t i, std::size_t r) { return codebook.entry(r, st.selected[i]); },
        &st.residual);
    st.residual_norms.push_back(norm(st.residual));
    ++st.iterations;
  }
  return st;
}

DetectionResult ls_omp_detect(const ReceivedFrame& frame, const SpreadingCodebook& codebook,
                              std::size_t known_sparsity, double noise_variance, DataMode mode,
                              const ModulationScheme& modulation) {
  if (known_sparsity > codebook.num_devices)
    throw ConfigError("known_sparsity: exceeds device count");
  std::vector<Support> supports(frame.slots);
  for (std::size_t s = 0; s < frame.slots; ++s) {
    OmpState st = omp_slot(frame.slot_observation(s), codebook, known_sparsity, noise_variance);
    supports[s] = std::move(st.selected);
    std::sort(supports[s].begin(), supports[s].end());
  }
  DataDetection data = detect_data(frame, codebook, supports, noise_variance, mode, modulation);
  return assemble(std::move(supports), std::move(data));
}

DetectionResult oracle_ls_detect(const ReceivedFrame& frame, const SpreadingCodebook& codebook,
                                 const ModulationScheme& modulation) {
  const FrameGroundTruth& truth = frame.truth;
  std::vector<Support> supports = truth.activity.supports;
  DataDetection data;
  data.bits.resize(frame.slots);
  data.symbols.resize(frame.slots);
  data.flags.resize(frame.slots);
  for (std::size_t s = 0; s < frame.slots; ++s) {
    if (supports[s].empty()) {
      data.flags[s].emplace_back(kEmptySupport);
      continue;
    }
    const ComplexMatrix h = effective_channel(codebook, truth.channel, s, supports[s]);
    // pseudo-inverse, so wide or colliding supports still get the min-norm fit
    auto ls = min_norm_least_squares(h, frame.slot_observation(s));
    if (ls.rank < h.cols()) data.flags[s].emplace_back(kRankDeficient);
    data.symbols[s] = std::move(ls.x);
    for (const cplx& z : data.symbols[s]) data.bits[s].push_back(modulation.demap(z));
  }
  return assemble(std::move(supports), std::move(data));
}

DetectionResult proposed_detect(const AudModel& model, const ReceivedFrame& frame,
                                const SpreadingCodebook& codebook,
                                const ModulationScheme& modulation, const DetectorConfig& config) {
  AudResult aud = aud_detect(model, frame, config);
  DataDetection data = detect_data(frame, codebook, aud.supports, frame.noise_variance,
                                   config.data_mode, modulation);
  DetectionResult out = assemble(std::move(aud.supports), std::move(data));
  out.probabilities = std::move(aud.probabilities);
  return out;
}

namespace {

class NetworkDetector final : public Detector {
 public:
  NetworkDetector(std::string name, std::shared_ptr<const AudModel> model,
                  const SpreadingCodebook& codebook, const ModulationScheme& modulation,
                  DetectorConfig config)
      : name_(std::move(name)),
        model_(std::move(model)),
        codebook_(codebook),
        modulation_(modulation),
        config_(config) {
    if (!model_) throw ConfigError("detector '" + name_ + "' needs a trained checkpoint");
    validate(config_);
  }
  std::string name() const override { return name_; }
  DetectionResult detect(const ReceivedFrame& frame) const override {
    return proposed_detect(*model_, frame, codebook_, modulation_, config_);
  }

 private:
  std::string name_;
  std::shared_ptr<const AudModel> model_;
  const SpreadingCodebook& codebook_;
  ModulationScheme modulation_;
  DetectorConfig config_;
};

class LsOmpDetector final : public Detector {
 public:
  LsOmpDetector(const SpreadingCodebook& codebook, const ModulationScheme& modulation,
                std::size_t sparsity, DataMode mode)
      : codebook_(codebook), modulation_(modulation), sparsity_(sparsity), mode_(mode) {
    if (sparsity_ > codebook_.num_devices) throw ConfigError("known_sparsity: exceeds device count");
  }
  std::string name() const override { return "ls-omp"; }
  DetectionResult detect(const ReceivedFrame& frame) const override {
    return ls_omp_detect(frame, codebook_, sparsity_, frame.noise_variance, mode_, modulation_);
  }

 private:
  const SpreadingCodebook& codebook_;
  ModulationScheme modulation_;
  std::size_t sparsity_;
  DataMode mode_;
};

class OracleLsDetector final : public Detector {
 public:
  OracleLsDetector(const SpreadingCodebook& codebook, const ModulationScheme& modulation)
      : codebook_(codebook), modulation_(modulation) {}
  std::string name() const override { return "oracle-ls"; }
  DetectionResult detect(const ReceivedFrame& frame) const override {
    return oracle_ls_detect(frame, codebook_, modulation_);
  }

 private:
  const SpreadingCodebook& codebook_;
  ModulationScheme modulation_;
};

}  // namespace

std::unique_ptr<Detector> make_network_detector(std::string name,
                                                std::shared_ptr<const AudModel> model,
                                                const SpreadingCodebook& codebook,
                                                const ModulationScheme& modulation,
                                                DetectorConfig config) {
  return std::make_unique<NetworkDetector>(std::move(name), std::move(model), codebook, modulation,
                                           config);
}

std::unique_ptr<Detector> make_ls_omp_detector(const SpreadingCodebook& codebook,
                                               const ModulationScheme& modulation,
                                               std::size_t known_sparsity, DataMode mode) {
  return std::make_unique<LsOmpDetector>(codebook, modulation, known_sparsity, mode);
}

std::unique_ptr<Detector> make_oracle_ls_detector(const SpreadingCodebook& codebook,
                                                  const ModulationScheme& modulation) {
  return std::make_unique<OracleLsDetector>(codebook, modulation);
}

}  // namespace gfnm::detect
