// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gfnm/detect/detectors.hpp"
#include "gfnm/eval/metrics.hpp"

namespace gfnm::eval {

/// kDevices sweeps K at fixed N (the overloading factor K/N).
enum class SweepAxis { kSnr, kSparsity, kDevices, kEta };

const char* to_string(SweepAxis axis);
/// snr, sparsity, devices, eta.
SweepAxis parse_sweep_axis(const std::string& text);

/// Evaluation frames start here so they never coincide with training frames
/// drawn from the same generator seed.
inline constexpr std::uint64_t kEvaluationFrameBase = std::uint64_t{1} << 40;

struct SweepConfig {
  SystemConfig system;
  /// Generator seed. It fixes the codebook, so it must match training.
  std::uint64_t seed = 1;
  SweepAxis axis = SweepAxis::kSnr;
  std::vector<double> values;
  double snr_db = 8.0;  // for non-SNR axes
  std::size_t trials = 1000;
  /// Trial t at every sweep point uses frame index first_frame + t.
  std::uint64_t first_frame = kEvaluationFrameBase;
  std::size_t workers = 1;
  bool rotation_invariant = false;
  bool keep_samples = false;
};

void validate(const SweepConfig& config);

/// start, start+step, … up to stop inclusive (within step/1e6). Throws
/// ConfigError for step <= 0 or stop < start.
std::vector<double> axis_range(double start, double stop, double step);

SystemConfig system_at(const SweepConfig& config, double value);
double snr_at(const SweepConfig& config, double value);

struct DetectorSpec {
  std::string name;
  std::function<std::unique_ptr<detect::Detector>(const FrameGenerator&)> make;
};

struct Summary {
  double mean = 0.0;
  double ci = 0.0;  // 95% half-width, normal approximation
  bool operator==(const Summary&) const = default;
};

Summary summarize(std::span<const double> values);
/// Summary of a[i] − b[i].
Summary paired_difference(std::span<const double> a, std::span<const double> b);

struct MetricsRecord {
  double axis_value = 0.0;
  std::string detector;
  Summary rho_d;
  Summary accuracy;
  Summary ber;
  Summary false_alarm;
  std::size_t trials = 0;
  bool operator==(const MetricsRecord&) const = default;
};

struct MetricsReport {
  SweepAxis axis = SweepAxis::kSnr;
  std::vector<MetricsRecord> records;
  /// Per-trial metrics parallel to `records` (only with keep_samples).
  std::vector<std::vector<FrameMetrics>> samples;

  const MetricsRecord& find(double axis_value, const std::string& detector) const;
  std::size_t index_of(double axis_value, const std::string& detector) const;
};

struct FrameOutcome {
  std::size_t point = 0;
  std::uint64_t frame_id = 0;
  const ReceivedFrame* frame = nullptr;
  const std::string* detector = nullptr;
  const detect::DetectionResult* result = nullptr;
  const FrameMetrics* metrics = nullptr;
};

/// Called in (point, trial, detector) order whatever the worker count.
using FrameCallback = std::function<void(const FrameOutcome&)>;

/// Every detector sees the same frames at a sweep point; rows are ordered by
/// point, then by the order of `detectors`.
MetricsReport run_monte_carlo(const SweepConfig& config, const std::vector<DetectorSpec>& detectors,
                              const FrameCallback& on_frame = {});

}  // namespace gfnm::eval
