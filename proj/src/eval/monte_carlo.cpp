// SPDX-License-Identifier: Apache-2.0
#include "gfnm/eval/monte_carlo.hpp"

#include <cmath>
#include <thread>

#include "gfnm/errors.hpp"

namespace gfnm::eval {

namespace {

constexpr std::size_t kChunk = 128;

std::size_t as_count(double v, const char* field) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9)
    throw ConfigError(std::string(field) + ": sweep value must be a positive integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kSnr: return "snr";
    case SweepAxis::kSparsity: return "sparsity";
    case SweepAxis::kDevices: return "devices";
    case SweepAxis::kEta: return "eta";
  }
  return "?";
}

SweepAxis parse_sweep_axis(const std::string& text) {
  for (SweepAxis a : {SweepAxis::kSnr, SweepAxis::kSparsity, SweepAxis::kDevices, SweepAxis::kEta})
    if (text == to_string(a)) return a;
  throw ConfigError("axis: unknown '" + text + "' (valid: snr, sparsity, devices, eta)");
}

std::vector<double> axis_range(double start, double stop, double step) {
  if (!(step > 0.0)) throw ConfigError("sweep step: must be > 0");
  if (!(stop >= start)) throw ConfigError("sweep range: stop must be >= start");
  std::vector<double> out;
  const double slack = step * 1e-6;
  for (std::size_t i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * step;
    if (v > stop + slack) break;
    // Snap to a short decimal so 0.1 steps print as 0.7, not 0.70000000000000007.
    out.push_back(std::round(v * 1e9) / 1e9);
  }
  return out;
}

SystemConfig system_at(const SweepConfig& config, double value) {
  SystemConfig s = config.system;
  switch (config.axis) {
    case SweepAxis::kSnr: break;
    case SweepAxis::kSparsity: s.sparsity = as_count(value, "S"); break;
    case SweepAxis::kDevices: s.num_devices = as_count(value, "K"); break;
    case SweepAxis::kEta: s.eta = value; break;
  }
  return s;
}

double snr_at(const SweepConfig& config, double value) {
  return config.axis == SweepAxis::kSnr ? value : config.snr_db;
}

void validate(const SweepConfig& config) {
  if (config.values.empty()) throw ConfigError("sweep: no axis values");
  if (config.trials == 0) throw ConfigError("trials: must be >= 1");
  if (config.workers == 0) throw ConfigError("workers: must be >= 1");
  for (double v : config.values) {
    validate(system_at(config, v));
    if (!std::isfinite(snr_at(config, v))) throw ConfigError("snr: must be finite");
  }
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  s.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.ci = 1.959963984540054 * std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

Summary paired_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("paired_difference: sample sizes differ");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return summarize(d);
}

std::size_t MetricsReport::index_of(double axis_value, const std::string& detector) const {
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].detector == detector && std::abs(records[i].axis_value - axis_value) < 1e-9)
      return i;
  throw InputError("MetricsReport: no row for detector '" + detector + "' at " +
                   std::to_string(axis_value));
}

const MetricsRecord& MetricsReport::find(double axis_value, const std::string& detector) const {
  return records[index_of(axis_value, detector)];
}

MetricsReport run_monte_carlo(const SweepConfig& config, const std::vector<DetectorSpec>& detectors,
                              const FrameCallback& on_frame) {
  if (detectors.empty()) throw ConfigError("detectors: at least one required");
  validate(config);
  MetricsReport report;
  report.axis = config.axis;
  const std::size_t nd = detectors.size();

  for (std::size_t p = 0; p < config.values.size(); ++p) {
    const double value = config.values[p];
    const FrameGenerator generator(system_at(config, value), config.seed);
    const double snr = snr_at(config, value);
    std::vector<std::unique_ptr<detect::Detector>> dets;
    for (const auto& spec : detectors) {
      if (!spec.make) throw ConfigError("detector '" + spec.name + "' has no factory");
      dets.push_back(spec.make(generator));
    }
    std::vector<std::vector<FrameMetrics>> per_det(nd);
    for (auto& v : per_det) v.reserve(config.trials);

    for (std::size_t begin = 0; begin < config.trials; begin += kChunk) {
      const std::size_t count = std::min(kChunk, config.trials - begin);
      std::vector<ReceivedFrame> frames(on_frame ? count : 0);
      std::vector<detect::DetectionResult> results(on_frame ? count * nd : 0);
      std::vector<FrameMetrics> metrics(count * nd);
      std::vector<std::exception_ptr> errors(config.workers);

      auto work = [&](std::size_t w) {
        try {
          for (std::size_t i = w; i < count; i += config.workers) {
            ReceivedFrame frame = generator.frame(config.first_frame + begin + i, snr);
            for (std::size_t d = 0; d < nd; ++d) {
              detect::DetectionResult r = dets[d]->detect(frame);
              metrics[i * nd + d] =
                  frame_metrics(frame, r, generator.modulation(), config.rotation_invariant);
              if (on_frame) results[i * nd + d] = std::move(r);
            }
            if (on_frame) frames[i] = std::move(frame);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      };
      if (config.workers == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < config.workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
      }
      for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

      for (std::size_t i = 0; i < count; ++i)
        for (std::size_t d = 0; d < nd; ++d) {
          per_det[d].push_back(metrics[i * nd + d]);
          if (on_frame)
            on_frame({p, config.first_frame + begin + i, &frames[i], &detectors[d].name,
                      &results[i * nd + d], &metrics[i * nd + d]});
        }
    }

    for (std::size_t d = 0; d < nd; ++d) {
      const auto& m = per_det[d];
      std::vector<double> rho, acc, ber, fa;
      for (const auto& x : m) {
        rho.push_back(x.rho_d);
        acc.push_back(x.accuracy);
        ber.push_back(x.ber);
        fa.push_back(x.false_alarm);
      }
      report.records.push_back({value, detectors[d].name, summarize(rho), summarize(acc),
                                summarize(ber), summarize(fa), m.size()});
      if (config.keep_samples) report.samples.push_back(m);
    }
  }
  return report;
}

}  // namespace gfnm::eval
