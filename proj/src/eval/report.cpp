// SPDX-License-Identifier: Apache-2.0
#include "gfnm/eval/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gfnm/errors.hpp"

namespace gfnm::eval {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1-2-5 step giving roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};
constexpr const char* kMarkers[] = {"circle", "square", "diamond", "triangle"};

}  // namespace

std::string metrics_csv(const MetricsReport& report) {
  std::string out =
      "axis_value,detector,rho_d,rho_d_ci,accuracy,accuracy_ci,ber,ber_ci,trials,false_alarm,"
      "false_alarm_ci\n";
  for (const auto& r : report.records) {
    out += num(r.axis_value) + "," + r.detector + "," + num(r.rho_d.mean) + "," + num(r.rho_d.ci) +
           "," + num(r.accuracy.mean) + "," + num(r.accuracy.ci) + "," + num(r.ber.mean) + "," +
           num(r.ber.ci) + "," + std::to_string(r.trials) + "," + num(r.false_alarm.mean) + "," +
           num(r.false_alarm.ci) + "\n";
  }
  return out;
}

std::string flops_csv(const std::vector<FlopRow>& rows) {
  std::string out = "technique,S,flops\n";
  for (const auto& r : rows)
    out += std::string(to_string(r.technique)) + "," + std::to_string(r.sparsity) + "," +
           num(r.flops) + "\n";
  return out;
}

const char* to_string(Metric m) {
  switch (m) {
    case Metric::kDetection: return "rho_d";
    case Metric::kAccuracy: return "accuracy";
    case Metric::kBer: return "ber";
    case Metric::kFalseAlarm: return "false_alarm";
  }
  return "?";
}

LinePlot metric_plot(const MetricsReport& report, Metric metric) {
  LinePlot plot;
  switch (report.axis) {
    case SweepAxis::kSnr: plot.x_label = "SNR (dB)"; break;
    case SweepAxis::kSparsity: plot.x_label = "Active devices S"; break;
    case SweepAxis::kDevices: plot.x_label = "Potential devices K"; break;
    case SweepAxis::kEta: plot.x_label = "Temporal correlation"; break;
  }
  switch (metric) {
    case Metric::kDetection: plot.y_label = "Detection probability"; break;
    case Metric::kAccuracy: plot.y_label = "Identification accuracy (%)"; break;
    case Metric::kBer:
      plot.y_label = "BER";
      plot.log_y = true;
      break;
    case Metric::kFalseAlarm: plot.y_label = "False-alarm rate"; break;
  }
  plot.title = plot.y_label + " vs " + plot.x_label;
  for (const auto& r : report.records) {
    auto it = std::find_if(plot.series.begin(), plot.series.end(),
                           [&](const PlotSeries& s) { return s.name == r.detector; });
    if (it == plot.series.end()) {
      plot.series.push_back({r.detector, {}, {}, {}});
      it = plot.series.end() - 1;
    }
    const Summary& s = metric == Metric::kDetection  ? r.rho_d
                       : metric == Metric::kAccuracy ? r.accuracy
                       : metric == Metric::kBer      ? r.ber
                                                     : r.false_alarm;
    it->x.push_back(r.axis_value);
    it->y.push_back(s.mean);
    it->err.push_back(s.ci);
  }
  return plot;
}

std::string render_svg(const LinePlot& plot) {
  const double w = 680, h = 440, left = 72, right = 170, top = 40, bottom = 56;
  const double pw = w - left - right, ph = h - top - bottom;

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      if (plot.log_y && !(s.y[i] > 0.0)) continue;
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;

  std::vector<double> yticks;
  double ylo, yhi;
  if (plot.log_y) {
    if (!std::isfinite(ymin)) ymin = 1e-3, ymax = 1;
    ylo = std::floor(std::log10(ymin));
    yhi = std::ceil(std::log10(ymax));
    if (yhi == ylo) yhi += 1;
    for (double e = ylo; e <= yhi + 1e-9; e += 1) yticks.push_back(e);
  } else {
    if (!std::isfinite(ymin)) ymin = 0, ymax = 1;
    ymin = std::min(ymin, 0.0);
    if (ymax == ymin) ymax = ymin + 1;
    const double st = nice_step(ymax - ymin, 5);
    ylo = std::floor(ymin / st) * st;
    yhi = std::ceil(ymax / st) * st;
    for (double v = ylo; v <= yhi + st * 1e-6; v += st) yticks.push_back(v);
  }
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) {
    const double v = plot.log_y ? std::log10(std::max(y, std::pow(10.0, ylo))) : y;
    return top + ph - (v - ylo) / (yhi - ylo) * ph;
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(plot.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : yticks) {
    const double y = top + ph - (t - ylo) / (yhi - ylo) * ph;
    o << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
      << (plot.log_y ? "1e" + num(t) : num(t)) << "</text>\n";
  }
  const double xst = nice_step(xmax - xmin, 6);
  for (double t = std::ceil(xmin / xst) * xst; t <= xmax + xst * 1e-6; t += xst) {
    const double x = px(t);
    o << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << top + ph
      << "\" stroke=\"#eee\"/>\n";
    o << "<text x=\"" << x << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
      << num(std::round(t * 1e9) / 1e9) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 14 << "\" text-anchor=\"middle\">"
    << escape(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << top + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << "</text>\n";

  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    const char* color = kColors[si % std::size(kColors)];
    const std::string marker = kMarkers[si % std::size(kMarkers)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) o << px(s.x[i]) << "," << py(s.y[i]) << " ";
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double x = px(s.x[i]), y = py(s.y[i]);
      if (i < s.err.size() && s.err[i] > 0.0)
        o << "<line x1=\"" << x << "\" y1=\"" << py(s.y[i] + s.err[i]) << "\" x2=\"" << x
          << "\" y2=\"" << py(s.y[i] - s.err[i]) << "\" stroke=\"" << color << "\"/>\n";
      if (marker == "circle")
        o << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
      else if (marker == "square")
        o << "<rect x=\"" << x - 3.5 << "\" y=\"" << y - 3.5
          << "\" width=\"7\" height=\"7\" fill=\"" << color << "\"/>\n";
      else if (marker == "diamond")
        o << "<polygon points=\"" << x << "," << y - 4.5 << " " << x + 4.5 << "," << y << " " << x
          << "," << y + 4.5 << " " << x - 4.5 << "," << y << "\" fill=\"" << color << "\"/>\n";
      else
        o << "<polygon points=\"" << x << "," << y - 4.5 << " " << x + 4.5 << "," << y + 3.5
          << " " << x - 4.5 << "," << y + 3.5 << "\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 14 + 20.0 * static_cast<double>(si);
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string detection_json_lines(const FrameOutcome& outcome, const ModulationScheme& modulation) {
  if (!outcome.frame || !outcome.result || !outcome.detector)
    throw InputError("detection_json_lines: incomplete outcome");
  const ReceivedFrame& f = *outcome.frame;
  const detect::DetectionResult& r = *outcome.result;
  std::string out;
  for (std::size_t s = 0; s < r.slots(); ++s) {
    const Support& truth = f.truth.activity.supports[s];
    nlohmann::json j;
    j["frame_id"] = outcome.frame_id;
    j["detector"] = *outcome.detector;
    j["slot"] = s;
    j["support_true"] = truth;
    j["support_est"] = r.supports[s];
    nlohmann::json shat = nlohmann::json::array();
    if (s < r.symbols.size())
      for (const cplx& z : r.symbols[s]) shat.push_back({z.real(), z.imag()});
    j["s_hat"] = shat;
    nlohmann::json bits = nlohmann::json::array();
    for (const Bits& b : r.bits[s]) bits.push_back(b);
    j["bits"] = bits;
    j["ber"] = count_bit_errors(f.truth, s, r.supports[s], r.bits[s], modulation).rate();
    if (truth.empty()) {
      j["rho_d"] = nullptr;
      j["accuracy"] = nullptr;
    } else {
      j["rho_d"] = detection_probability(truth, r.supports[s]);
      j["accuracy"] = identification_accuracy(truth, r.supports[s], truth.size());
    }
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace gfnm::eval
