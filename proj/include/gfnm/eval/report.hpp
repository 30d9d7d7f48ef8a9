// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "gfnm/eval/flops.hpp"
#include "gfnm/eval/monte_carlo.hpp"

namespace gfnm::eval {

/// Header: axis_value,detector,rho_d,rho_d_ci,accuracy,accuracy_ci,ber,ber_ci,
/// trials,false_alarm,false_alarm_ci
std::string metrics_csv(const MetricsReport& report);

struct FlopRow {
  Technique technique;
  std::size_t sparsity;
  double flops;
};

/// Header: technique,S,flops
std::string flops_csv(const std::vector<FlopRow>& rows);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional error-bar half-widths
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Self-contained SVG line chart.
std::string render_svg(const LinePlot& plot);

enum class Metric { kDetection, kAccuracy, kBer, kFalseAlarm };
const char* to_string(Metric m);

/// One series per detector, in first-appearance order.
LinePlot metric_plot(const MetricsReport& report, Metric metric);

/// One JSON object per slot:
/// {frame_id, detector, slot, support_true, support_est, s_hat, bits, ber, rho_d, accuracy}.
/// s_hat is a list of [re, im]; rho_d and accuracy are null for a slot
/// without active devices.
std::string detection_json_lines(const FrameOutcome& outcome, const ModulationScheme& modulation);

}  // namespace gfnm::eval
