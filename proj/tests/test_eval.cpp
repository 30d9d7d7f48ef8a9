// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <json.hpp>

#include <cmath>

#include "gfnm/errors.hpp"
#include "gfnm/eval/flops.hpp"
#include "gfnm/eval/metrics.hpp"
#include "gfnm/eval/monte_carlo.hpp"
#include "gfnm/eval/report.hpp"

using namespace gfnm;
using namespace gfnm::eval;

namespace {

FrameGroundTruth truth_with(std::size_t k, std::vector<Support> supports, std::uint64_t seed) {
  FrameGroundTruth t;
  t.activity.num_devices = k;
  t.activity.sparsity = supports.empty() ? 0 : supports[0].size();
  t.activity.supports = std::move(supports);
  RngStream rng(seed, 3);
  t.bits = draw_bits(t.activity, 2, rng);
  return t;
}

std::vector<Bits> tx_words(const FrameGroundTruth& t, std::size_t slot, const Support& est) {
  std::vector<Bits> out;
  for (std::uint32_t k : est) {
    const auto b = t.device_bits(slot, k);
    out.emplace_back(b.begin(), b.end());
  }
  return out;
}

SystemConfig small_system() {
  SystemConfig s;
  s.num_devices = 12;
  s.spreading_length = 6;
  s.sparsity = 2;
  s.slots = 4;
  return s;
}

std::vector<DetectorSpec> baseline_specs() {
  return {
      {"ls-omp",
       [](const FrameGenerator& g) {
         return detect::make_ls_omp_detector(g.codebook(), g.modulation(), g.config().sparsity,
                                             detect::DataMode::kOracleChannel);
       }},
      {"oracle-ls",
       [](const FrameGenerator& g) {
         return detect::make_oracle_ls_detector(g.codebook(), g.modulation());
       }},
  };
}

}  // namespace

TEST_CASE("detection probability and identification accuracy") {
  const Support g{1, 2, 3, 4};
  CHECK(detection_probability(g, Support{1, 2, 3, 4}) == 1.0);
  CHECK(detection_probability(g, Support{1, 2, 9}) == 0.5);
  CHECK(detection_probability(g, Support{7, 8}) == 0.0);
  CHECK_THROWS_AS(detection_probability(Support{}, Support{1}), InputError);

  CHECK(identification_accuracy(g, g, 4) == 100.0);
  CHECK(identification_accuracy(g, Support{5, 6}, 4) == 0.0);
  Support g20, e17;
  for (std::uint32_t k = 0; k < 20; ++k) g20.push_back(k);
  for (std::uint32_t k = 3; k < 20; ++k) e17.push_back(k);
  e17.push_back(40);
  CHECK(identification_accuracy(g20, e17, 20) == doctest::Approx(85.0));
  CHECK_THROWS_AS(identification_accuracy(g, g, 0), InputError);
}

TEST_CASE("bit error rate conventions") {
  const auto qpsk = ModulationScheme::qpsk();
  std::vector<Support> sup(7);
  for (std::size_t j = 0; j < 7; ++j)
    for (std::uint32_t k = 0; k < 20; ++k) sup[j].push_back(k + static_cast<std::uint32_t>(j));
  const auto t = truth_with(40, sup, 9);

  SUBCASE("perfect decode") {
    for (std::size_t j = 0; j < 7; ++j)
      CHECK(bit_error_rate(t, j, sup[j], tx_words(t, j, sup[j]), qpsk) == 0.0);
  }
  SUBCASE("empty estimate loses every bit") {
    CHECK(bit_error_rate(t, 0, Support{}, {}, qpsk) == 1.0);
  }
  SUBCASE("one flipped bit among 280") {
    BitErrorCount total;
    for (std::size_t j = 0; j < 7; ++j) {
      auto words = tx_words(t, j, sup[j]);
      if (j == 3) words[5][1] ^= 1;
      total += count_bit_errors(t, j, sup[j], words, qpsk);
    }
    CHECK(total.total == 280);
    CHECK(total.errors == 1);
    CHECK(total.rate() == doctest::Approx(1.0 / 280.0));
  }
  SUBCASE("false alarms add full-length bursts to numerator and denominator") {
    Support est = sup[0];
    est.push_back(35);
    auto words = tx_words(t, 0, sup[0]);
    words.push_back({0, 0});
    const auto c = count_bit_errors(t, 0, est, words, qpsk);
    CHECK(c.errors == 2);
    CHECK(c.total == 42);
  }
  SUBCASE("rotation-invariant scoring forgives a common 90 degree turn") {
    auto words = tx_words(t, 0, sup[0]);
    for (auto& w : words) w = qpsk.demap(qpsk.map(w) * cplx(0.0, 1.0));
    CHECK(count_bit_errors(t, 0, sup[0], words, qpsk).errors > 0);
    CHECK(count_bit_errors(t, 0, sup[0], words, qpsk, true).errors == 0);
  }
  CHECK_THROWS_AS(count_bit_errors(t, 0, sup[0], {}, qpsk), InputError);
}

TEST_CASE("frame metrics stay in range and rho equals accuracy / 100") {
  const FrameGenerator gen(small_system(), 3);
  const auto qpsk = ModulationScheme::qpsk();
  for (std::uint64_t i = 0; i < 30; ++i) {
    const auto f = gen.frame(i, 4.0);
    const auto r = detect::ls_omp_detect(f, gen.codebook(), 3, f.noise_variance,
                                         detect::DataMode::kOracleChannel, qpsk);
    const auto m = frame_metrics(f, r, qpsk);
    CHECK(m.rho_d >= 0.0);
    CHECK(m.rho_d <= 1.0);
    CHECK(m.ber >= 0.0);
    CHECK(m.ber <= 1.0);
    CHECK(m.accuracy == doctest::Approx(100.0 * m.rho_d));
    CHECK(m.false_alarm >= 0.0);
    CHECK(m.false_alarm <= 1.0);
    // Three picks per slot with S = 2: at least one false alarm per slot.
    CHECK(m.false_alarm >= 4.0 / (4.0 * 10.0) - 1e-12);
  }
}

TEST_CASE("flop models reproduce the published complexity table") {
  struct Cell {
    Technique t;
    std::size_t s;
    double printed;
  };
  const Cell table[] = {
      {Technique::kLsOmp, 10, 1.41e9},    {Technique::kLsOmp, 20, 1.76e10},
      {Technique::kLsOmp, 30, 8.15e10},   {Technique::kLsOmp, 40, 2.46e11},
      {Technique::kDAud, 10, 5.33e7},     {Technique::kDAud, 20, 1.00e8},
      {Technique::kDAud, 30, 1.46e8},     {Technique::kDAud, 40, 1.93e8},
      {Technique::kLstmCs, 10, 7.87e7},   {Technique::kLstmCs, 20, 1.25e8},
      {Technique::kLstmCs, 30, 1.72e8},   {Technique::kLstmCs, 40, 2.19e8},
      {Technique::kProposed, 10, 1.04e8}, {Technique::kProposed, 20, 1.51e8},
      {Technique::kProposed, 30, 1.97e8}, {Technique::kProposed, 40, 2.46e8},
  };
  for (const auto& c : table) {
    CAPTURE(to_string(c.t));
    CAPTURE(c.s);
    FlopModel m;
    m.technique = c.t;
    m.sparsity = c.s;
    CHECK(std::abs(flops(m) / c.printed - 1.0) <= 0.03);
  }
  FlopModel p;
  p.sparsity = 10;
  // 2α²(8L+3) + 2α(16N+K) − α(L+3) + 3K − 1 + 2N + S(14/3 N³ + N² − N), by hand.
  const double expect = 2e6 * 27 + 2000.0 * 1800 - 6000 + 599 + 200 + 10 * (14e6 / 3 + 1e4 - 100);
  CHECK(flops(p) == doctest::Approx(expect).epsilon(1e-15));
  CHECK(flops(p) == doctest::Approx(1.0436e8).epsilon(1e-4));
  CHECK(mmse_flops(100, 10) == doctest::Approx(2.0 * 100 + 10 * (14e6 / 3 + 1e4 - 100)));
}

TEST_CASE("flop models: monotone in S, trend claims, full-frame width") {
  for (Technique t : all_techniques()) {
    FlopModel m;
    m.technique = t;
    double prev = 0.0;
    for (std::size_t s = 1; s <= 60; ++s) {
      m.sparsity = s;
      const double f = flops(m);
      CHECK(f > 0.0);
      CHECK(f >= prev);
      prev = f;
    }
  }
  FlopModel a, b;
  a.sparsity = 10;
  b.sparsity = 20;
  CHECK(flops(b) / flops(a) < 2.0);
  a.technique = b.technique = Technique::kLsOmp;
  CHECK(flops(b) / flops(a) > 10.0);

  FlopModel per_slot, full;
  full.input_slots = 7;
  CHECK(flops(full) - flops(per_slot) == doctest::Approx(2.0 * 1000 * 16 * 100 * 6));
  per_slot.technique = full.technique = Technique::kLsOmp;
  CHECK(flops(full) == flops(per_slot));

  CHECK(parse_technique("d-aud") == Technique::kDAud);
  CHECK_THROWS_AS(parse_technique("lasso"), ConfigError);
  FlopModel bad;
  bad.width = 0;
  CHECK_THROWS_AS(flops(bad), ConfigError);
}

TEST_CASE("summaries and axis ranges") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const Summary s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(s.ci == doctest::Approx(1.959963984540054 * std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(summarize(std::vector<double>{0.7}).ci == 0.0);
  const Summary d = paired_difference(v, std::vector<double>{0.0, 1.0, 2.0, 3.0});
  CHECK(d.mean == 1.0);
  CHECK(d.ci == 0.0);

  CHECK(axis_range(0, 20, 2).size() == 11);
  const auto eta = axis_range(0.5, 1.0, 0.1);
  REQUIRE(eta.size() == 6);
  CHECK(eta[2] == 0.7);
  CHECK(eta.back() == 1.0);
  CHECK(axis_range(3, 3, 1) == std::vector<double>{3});
  CHECK_THROWS_AS(axis_range(0, 1, 0), ConfigError);
  CHECK_THROWS_AS(axis_range(2, 1, 1), ConfigError);
  CHECK(parse_sweep_axis("eta") == SweepAxis::kEta);
  CHECK_THROWS_AS(parse_sweep_axis("power"), ConfigError);
}

TEST_CASE("Monte Carlo sweep: pairing, determinism, oracle detection, bounds") {
  SweepConfig cfg;
  cfg.system = small_system();
  cfg.seed = 5;
  cfg.values = axis_range(0, 20, 10);
  cfg.trials = 40;
  cfg.keep_samples = true;

  std::vector<std::uint64_t> seen_ls, seen_oracle;
  std::vector<std::vector<cplx>> obs_ls, obs_oracle;
  const auto report = run_monte_carlo(cfg, baseline_specs(), [&](const FrameOutcome& o) {
    if (*o.detector == "ls-omp") {
      seen_ls.push_back(o.frame_id);
      obs_ls.push_back(o.frame->observation);
    } else {
      seen_oracle.push_back(o.frame_id);
      obs_oracle.push_back(o.frame->observation);
    }
  });
  REQUIRE(report.records.size() == 6);
  CHECK(seen_ls == seen_oracle);
  CHECK(obs_ls == obs_oracle);
  CHECK(seen_ls.front() == kEvaluationFrameBase);

  for (const auto& r : report.records) {
    CHECK(r.trials == 40);
    CHECK(r.rho_d.mean >= 0.0);
    CHECK(r.rho_d.mean <= 1.0);
    CHECK(r.ber.mean >= 0.0);
    CHECK(r.ber.mean <= 1.0);
    CHECK(r.accuracy.mean == doctest::Approx(100.0 * r.rho_d.mean));
    if (r.detector == "oracle-ls") {
      CHECK(r.rho_d.mean == 1.0);
      CHECK(r.rho_d.ci == 0.0);
    }
  }
  // Oracle dominance over LS-OMP at every point.
  for (double v : cfg.values)
    CHECK(report.find(v, "oracle-ls").ber.mean <= report.find(v, "ls-omp").ber.mean);

  const auto again = run_monte_carlo(cfg, baseline_specs());
  CHECK(again.records == report.records);
  CHECK(metrics_csv(again) == metrics_csv(report));

  cfg.workers = 3;
  CHECK(run_monte_carlo(cfg, baseline_specs()).records == report.records);
}

TEST_CASE("Monte Carlo sweep over other axes and error paths") {
  SweepConfig cfg;
  cfg.system = small_system();
  cfg.trials = 5;
  cfg.snr_db = 10.0;
  cfg.axis = SweepAxis::kSparsity;
  cfg.values = {1, 2, 3};
  auto r = run_monte_carlo(cfg, baseline_specs());
  CHECK(r.records.size() == 6);
  cfg.axis = SweepAxis::kDevices;
  cfg.values = {9, 12, 15};
  CHECK_NOTHROW(run_monte_carlo(cfg, baseline_specs()));
  cfg.axis = SweepAxis::kEta;
  cfg.values = {0.5, 1.0};
  CHECK(run_monte_carlo(cfg, baseline_specs()).find(1.0, "oracle-ls").rho_d.mean == 1.0);

  cfg.values = {1.5};
  CHECK_THROWS_AS(run_monte_carlo(cfg, baseline_specs()), ConfigError);
  cfg.axis = SweepAxis::kSparsity;
  cfg.values = {2.5};
  CHECK_THROWS_AS(run_monte_carlo(cfg, baseline_specs()), ConfigError);
  cfg.values = {2};
  cfg.trials = 0;
  CHECK_THROWS_AS(run_monte_carlo(cfg, baseline_specs()), ConfigError);
  cfg.trials = 1;
  CHECK_THROWS_AS(run_monte_carlo(cfg, {}), ConfigError);
}

TEST_CASE("CSV, SVG and JSON-lines outputs") {
  SweepConfig cfg;
  cfg.system = small_system();
  cfg.values = {0, 10};
  cfg.trials = 3;
  std::string json;
  const auto qpsk = ModulationScheme::qpsk();
  const auto report = run_monte_carlo(cfg, baseline_specs(), [&](const FrameOutcome& o) {
    json += detection_json_lines(o, qpsk);
  });
  const std::string csv = metrics_csv(report);
  CHECK(csv.rfind(
            "axis_value,detector,rho_d,rho_d_ci,accuracy,accuracy_ci,ber,ber_ci,trials,"
            "false_alarm,false_alarm_ci\n",
            0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.find("\n10,oracle-ls,1,0,100,0,") != std::string::npos);

  std::size_t lines = 0;
  std::istringstream in(json);
  for (std::string line; std::getline(in, line); ++lines) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"frame_id", "detector", "slot", "support_true", "support_est", "s_hat",
                            "bits", "ber", "rho_d", "accuracy"})
      CHECK(j.contains(key));
    CHECK(j["s_hat"].size() == j["support_est"].size());
  }
  CHECK(lines == 2 * 3 * 2 * 4);

  for (Metric m : {Metric::kDetection, Metric::kAccuracy, Metric::kBer, Metric::kFalseAlarm}) {
    const LinePlot plot = metric_plot(report, m);
    CHECK(plot.series.size() == 2);
    CHECK(plot.series[0].name == "ls-omp");
    const std::string svg = render_svg(plot);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(svg.find("inf") == std::string::npos);
  }
  const std::string fc = flops_csv({{Technique::kProposed, 10, 1.0436e8}});
  CHECK(fc == "technique,S,flops\nproposed,10,104360000\n");
}
