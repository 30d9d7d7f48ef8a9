// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gfnm/detect/detectors.hpp"
#include "gfnm/errors.hpp"
#include "gfnm/numerics/linalg.hpp"

using namespace gfnm;
using namespace gfnm::detect;

namespace {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

CMat to_eigen(const ComplexMatrix& m) {
  CMat out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
  return out;
}

CVec to_eigen(std::span<const cplx> v) {
  CVec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

double max_diff(std::span<const cplx> a, const CVec& b) {
  REQUIRE(a.size() == static_cast<std::size_t>(b.size()));
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b(static_cast<Eigen::Index>(i))));
  return d;
}

// c_k = e_k: mutually orthogonal with disjoint subcarrier support.
SpreadingCodebook unit_codebook(std::size_t k) {
  SpreadingCodebook cb;
  cb.num_devices = k;
  cb.spreading_length = k;
  cb.sequences = ComplexMatrix::identity(k);
  return cb;
}

SpreadingCodebook random_codebook(std::size_t k, std::size_t n, std::uint64_t seed) {
  return generate_codebook(k, n, default_spreading_alphabet(), seed);
}

ReceivedFrame make_frame(const SpreadingCodebook& cb, std::size_t sparsity, std::size_t slots,
                         double noise_variance, std::uint64_t seed) {
  const ModulationScheme qpsk = ModulationScheme::qpsk();
  RngStream root(seed, 0);
  RngStream act = root.derive(1), ch = root.derive(2), bits = root.derive(3), noise = root.derive(4);
  ActivityFrame activity = generate_activity(cb.num_devices, sparsity, slots, 0.5, act);
  ChannelRealization channel =
      generate_channel(cb.num_devices, cb.spreading_length, slots, PathLossConfig{}, ch);
  Bits b = draw_bits(activity, qpsk.bits_per_symbol(), bits);
  return synthesize_frame_with_noise(cb, std::move(activity), std::move(channel), std::move(b),
                                     qpsk, noise_variance, noise);
}

std::size_t bit_errors(const ReceivedFrame& frame, const DetectionResult& r) {
  std::size_t errors = 0;
  for (std::size_t s = 0; s < r.slots(); ++s)
    for (std::size_t i = 0; i < r.supports[s].size(); ++i) {
      const auto tx = frame.truth.device_bits(s, r.supports[s][i]);
      for (std::size_t b = 0; b < tx.size(); ++b) errors += tx[b] != r.bits[s][i][b];
    }
  return errors;
}

AudModel tiny_model(std::size_t k, std::size_t n, std::size_t j, nn::HeadMode head) {
  nn::ArchitectureConfig arch;
  arch.width = 6;
  arch.hidden_layers = 1;
  arch.head = head;
  AudModel m;
  m.params = nn::initialize(nn::network_shape(k, n, j, arch), 17);
  return m;
}

}  // namespace

TEST_CASE("data mode and threshold validation") {
  CHECK(parse_data_mode("blind") == DataMode::kBlind);
  CHECK(std::string(to_string(DataMode::kOracleChannel)) == "oracle-channel");
  CHECK_THROWS_AS(parse_data_mode("pilot"), ConfigError);
  DetectorConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  for (double t : {0.0, 1.0, -0.1, std::nan("")}) {
    cfg.threshold = t;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
  }
}

TEST_CASE("extract_sparse_signal copies the selected column blocks of the sensing matrix") {
  const auto cb = random_codebook(6, 4, 3);
  const std::size_t j = 3;
  const auto frame = make_frame(cb, 2, j, 0.1, 5);
  const CMat xi = to_eigen(cb.stacked_sensing_matrix(j));
  const std::size_t n = cb.spreading_length;

  SUBCASE("empty support gives a zero-width system") {
    const auto sys = extract_sparse_signal(frame, cb, std::vector<Support>(j));
    CHECK(sys.blocks.empty());
    CHECK(sys.dense().cols() == 0);
    CHECK(sys.dense().rows() == n * j);
    CHECK(sys.observation == frame.observation);
  }
  SUBCASE("full support reproduces the sensing matrix exactly") {
    Support all(cb.num_devices);
    for (std::uint32_t k = 0; k < all.size(); ++k) all[k] = k;
    const auto sys = extract_sparse_signal(frame, cb, std::vector<Support>(j, all));
    CHECK(to_eigen(sys.dense()) == xi);
  }
  SUBCASE("a partial support selects identical blocks") {
    const std::vector<Support> sup{{1, 4}, {}, {0, 4, 5}};
    const auto sys = extract_sparse_signal(frame, cb, sup);
    REQUIRE(sys.blocks.size() == 5);
    const CMat dense = to_eigen(sys.dense());
    for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
      const std::size_t col = (sys.blocks[b].device * j + sys.blocks[b].slot) * n;
      CHECK(dense.middleCols(static_cast<Eigen::Index>(b * n), static_cast<Eigen::Index>(n)) ==
            xi.middleCols(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(n)));
    }
    CHECK(sys.slot_blocks(1).empty());
    const auto s2 = sys.slot_blocks(2);
    REQUIRE(s2.size() == 3);
    CHECK(sys.blocks[s2[0]].device == 0);
    CHECK(sys.blocks[s2[2]].device == 5);
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(extract_sparse_signal(frame, cb, std::vector<Support>(j - 1)), InputError);
    CHECK_THROWS_AS(extract_sparse_signal(frame, cb, {{6}, {}, {}}), InputError);
  }
}

TEST_CASE("oracle-channel MMSE matches an explicit-inverse oracle") {
  const auto cb = random_codebook(5, 4, 11);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto frame = make_frame(cb, 2, 2, 0.05, seed);
    const auto& sup = frame.truth.activity.supports;
    const auto sys = extract_sparse_signal(frame, cb, sup);
    const auto out = blind_mmse_detect(sys, frame.noise_variance, DataMode::kOracleChannel,
                                       &frame.truth, ModulationScheme::qpsk());
    for (std::size_t s = 0; s < 2; ++s) {
      CMat h(4, static_cast<Eigen::Index>(sup[s].size()));
      for (std::size_t i = 0; i < sup[s].size(); ++i)
        for (std::size_t r = 0; r < 4; ++r)
          h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) =
              cb.entry(r, sup[s][i]) * frame.truth.channel.gain(s, sup[s][i], r);
      const CMat g = h.adjoint() * h +
                     frame.noise_variance * CMat::Identity(h.cols(), h.cols());
      const CVec expect = g.inverse() * h.adjoint() * to_eigen(frame.slot_observation(s));
      CHECK(max_diff(out.symbols[s], expect) < 1e-10);
      CHECK(out.flags[s].empty());
    }
  }
}

TEST_CASE("noiseless frames decode exactly on the true support") {
  const auto cb = random_codebook(8, 6, 2);
  const auto qpsk = ModulationScheme::qpsk();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto frame = make_frame(cb, 3, 4, 0.0, seed);
    const auto sys = extract_sparse_signal(frame, cb, frame.truth.activity.supports);
    const auto data = blind_mmse_detect(sys, 0.0, DataMode::kOracleChannel, &frame.truth, qpsk);
    DetectionResult r;
    r.supports = frame.truth.activity.supports;
    r.bits = data.bits;
    CHECK(bit_errors(frame, r) == 0);

    const auto oracle = oracle_ls_detect(frame, cb, qpsk);
    CHECK(oracle.supports == frame.truth.activity.supports);
    CHECK(bit_errors(frame, oracle) == 0);
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t i = 0; i < oracle.supports[s].size(); ++i)
        CHECK(std::abs(oracle.symbols[s][i] - frame.truth.symbol(s, oracle.supports[s][i])) < 1e-9);
  }
}

TEST_CASE("oracle LS matches a pseudo-inverse oracle") {
  const auto cb = random_codebook(6, 5, 8);
  const auto frame = make_frame(cb, 3, 3, 0.2, 21);
  const auto out = oracle_ls_detect(frame, cb, ModulationScheme::qpsk());
  for (std::size_t s = 0; s < 3; ++s) {
    const auto& sup = frame.truth.activity.supports[s];
    CMat h(5, static_cast<Eigen::Index>(sup.size()));
    for (std::size_t i = 0; i < sup.size(); ++i)
      for (std::size_t r = 0; r < 5; ++r)
        h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) =
            cb.entry(r, sup[i]) * frame.truth.channel.gain(s, sup[i], r);
    const CVec expect =
        h.completeOrthogonalDecomposition().pseudoInverse() * to_eigen(frame.slot_observation(s));
    CHECK(max_diff(out.symbols[s], expect) < 1e-10);
  }
}

TEST_CASE("oracle-channel mode needs ground truth; empty slots are flagged") {
  const auto cb = random_codebook(4, 3, 1);
  const auto frame = make_frame(cb, 1, 2, 0.1, 3);
  const auto sys = extract_sparse_signal(frame, cb, {{}, {2}});
  CHECK_THROWS_AS(blind_mmse_detect(sys, 0.1, DataMode::kOracleChannel, nullptr,
                                    ModulationScheme::qpsk()),
                  InputError);
  const auto out =
      blind_mmse_detect(sys, 0.1, DataMode::kOracleChannel, &frame.truth, ModulationScheme::qpsk());
  CHECK(out.bits[0].empty());
  CHECK(out.flags[0] == std::vector<std::string>{"empty-support"});
  CHECK(out.bits[1].size() == 1);
}

TEST_CASE("singular reduced system falls back to a ridge and says so") {
  // Two detected devices with identical sequences and identical channels.
  SpreadingCodebook cb = unit_codebook(3);
  for (std::size_t n = 0; n < 3; ++n) cb.sequences(n, 1) = cb.sequences(n, 0) = 1.0 / std::sqrt(3.0);
  auto frame = make_frame(cb, 2, 1, 0.0, 4);
  for (std::size_t n = 0; n < 3; ++n) frame.truth.channel.vector(0, 1)[n] = frame.truth.channel.gain(0, 0, n);
  const auto sys = extract_sparse_signal(frame, cb, {{0, 1}});
  const auto out =
      blind_mmse_detect(sys, 0.0, DataMode::kOracleChannel, &frame.truth, ModulationScheme::qpsk());
  CHECK(out.flags[0] == std::vector<std::string>{"ridge-fallback"});
  CHECK(out.bits[0].size() == 2);
  for (const cplx& z : out.symbols[0]) CHECK(std::isfinite(std::abs(z)));
}

TEST_CASE("block ridge solve agrees with the dense normal-equation solvers") {
  const auto cb = random_codebook(7, 5, 13);
  const auto frame = make_frame(cb, 3, 1, 0.3, 2);
  const std::vector<std::uint32_t> sup{0, 3, 6};
  const auto y = frame.slot_observation(0);
  const auto sys = extract_sparse_signal(frame, cb, {sup});
  const ComplexMatrix a = sys.dense();
  for (double reg : {0.3, 1e-3}) {
    const CVector v = block_ridge_solve(y, cb, sup, reg);
    const CVector ref = regularized_normal_solve(a, y, reg);
    CHECK(max_diff(v, to_eigen(ref)) < 1e-10);
  }
  // reg = 0: minimum-norm least squares.
  const CVector v0 = block_ridge_solve(y, cb, sup, 0.0);
  const CVec ref0 = to_eigen(a).completeOrthogonalDecomposition().pseudoInverse() * to_eigen(y);
  CHECK(max_diff(v0, ref0) < 1e-10);
}

TEST_CASE("OMP first selection equals an exhaustive correlation scan") {
  const auto cb = random_codebook(20, 8, 4);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto frame = make_frame(cb, 4, 1, 0.05, seed);
    const auto y = frame.slot_observation(0);
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::uint32_t k = 0; k < cb.num_devices; ++k) {
      const CMat xk = to_eigen(extract_sparse_signal(frame, cb, {{k}}).dense());
      const double v = (xk.adjoint() * to_eigen(y)).squaredNorm();
      if (v > best_val) best_val = v, best = k;
    }
    const auto st = omp_slot(y, cb, 1, frame.noise_variance);
    REQUIRE(st.selected.size() == 1);
    CHECK(st.selected[0] == best);
    CHECK(omp_correlations(cb, y)[best] == doctest::Approx(best_val).epsilon(1e-12));
  }
}

TEST_CASE("OMP residual norm never increases") {
  const auto cb = random_codebook(30, 10, 6);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto frame = make_frame(cb, 5, 1, seed % 2 ? 0.1 : 0.0, seed);
    const auto st = omp_slot(frame.slot_observation(0), cb, 8, frame.noise_variance);
    CHECK(st.iterations == 8);
    REQUIRE(st.residual_norms.size() == 9);
    CHECK(st.residual_norms[0] == doctest::Approx(norm(frame.slot_observation(0))));
    for (std::size_t i = 1; i < st.residual_norms.size(); ++i)
      CHECK(st.residual_norms[i] <= st.residual_norms[i - 1]);
    // Selections are distinct.
    auto sel = st.selected;
    std::sort(sel.begin(), sel.end());
    CHECK(std::adjacent_find(sel.begin(), sel.end()) == sel.end());
  }
}

TEST_CASE("OMP recovers the support for orthogonal sequences without noise") {
  const auto cb = unit_codebook(12);
  const auto qpsk = ModulationScheme::qpsk();
  SUBCASE("S = 1 in one iteration") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto frame = make_frame(cb, 1, 1, 0.0, seed);
      const auto st = omp_slot(frame.slot_observation(0), cb, 1, 0.0);
      CHECK(st.iterations == 1);
      CHECK(st.selected == frame.truth.activity.supports[0]);
      CHECK(st.residual_norms.back() < 1e-12);
    }
  }
  SUBCASE("S = 4 across slots, with exact data") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto frame = make_frame(cb, 4, 5, 0.0, seed);
      const auto r = ls_omp_detect(frame, cb, 4, 0.0, DataMode::kOracleChannel, qpsk);
      CHECK(r.supports == frame.truth.activity.supports);
      CHECK(r.sparsity == std::vector<std::size_t>(5, 4));
      CHECK(bit_errors(frame, r) == 0);
    }
  }
  CHECK_THROWS_AS(ls_omp_detect(make_frame(cb, 1, 1, 0.0, 1), cb, 13, 0.0,
                                DataMode::kOracleChannel, qpsk),
                  ConfigError);
  CHECK_THROWS_AS(make_ls_omp_detector(cb, qpsk, 13, DataMode::kBlind), ConfigError);
}

TEST_CASE("blind mode estimates the composite vector by ridge on the reduced system") {
  const auto cb = random_codebook(6, 8, 9);
  const auto frame = make_frame(cb, 2, 2, 0.05, 12);
  const auto& sup = frame.truth.activity.supports;
  const auto sys = extract_sparse_signal(frame, cb, sup);
  const auto out = blind_mmse_detect(sys, frame.noise_variance, DataMode::kBlind, nullptr,
                                     ModulationScheme::qpsk());
  for (std::size_t s = 0; s < 2; ++s) {
    const CVector v = block_ridge_solve(frame.slot_observation(s), cb, sup[s], frame.noise_variance);
    REQUIRE(out.symbols[s].size() == sup[s].size());
    for (std::size_t i = 0; i < sup[s].size(); ++i) {
      cplx z{0.0, 0.0};
      for (std::size_t n = 0; n < 8; ++n) z += v[i * 8 + n];
      CHECK(std::abs(out.symbols[s][i] - z) < 1e-12);
      CHECK(out.bits[s][i] == ModulationScheme::qpsk().demap(z));
    }
  }
}

TEST_CASE("aud_detect thresholds, monotonicity and shape checks") {
  const auto cb = random_codebook(5, 3, 7);
  const auto frame = make_frame(cb, 2, 4, 0.1, 9);
  for (nn::HeadMode head : {nn::HeadMode::kSigmoid, nn::HeadMode::kSoftmax}) {
    CAPTURE(nn::to_string(head));
    const AudModel model = tiny_model(5, 3, 4, head);
    DetectorConfig cfg;
    const auto base = aud_detect(model, frame, cfg);
    REQUIRE(base.probabilities.rows() == 5);
    REQUIRE(base.probabilities.cols() == 4);
    const double scale = head == nn::HeadMode::kSoftmax ? 5.0 : 1.0;
    for (std::size_t s = 0; s < 4; ++s) {
      CHECK(base.sparsity[s] == base.supports[s].size());
      for (std::uint32_t k = 0; k < 5; ++k) {
        const bool in = std::find(base.supports[s].begin(), base.supports[s].end(), k) !=
                        base.supports[s].end();
        CHECK(in == (base.probabilities(k, static_cast<Eigen::Index>(s)) * scale >= 0.5));
      }
    }
    std::vector<Support> prev = aud_detect(model, frame, {0.01, DataMode::kOracleChannel}).supports;
    for (double tau = 0.05; tau < 1.0; tau += 0.05) {
      const auto cur = aud_detect(model, frame, {tau, DataMode::kOracleChannel}).supports;
      for (std::size_t s = 0; s < 4; ++s)
        CHECK(std::includes(prev[s].begin(), prev[s].end(), cur[s].begin(), cur[s].end()));
      prev = cur;
    }
  }
  const AudModel wrong = tiny_model(5, 4, 4, nn::HeadMode::kSigmoid);
  CHECK_THROWS_AS(aud_detect(wrong, frame, {}), StateError);
}

TEST_CASE("empty estimated support skips data detection") {
  const auto cb = random_codebook(5, 3, 7);
  const auto frame = make_frame(cb, 2, 4, 0.1, 9);
  const AudModel model = tiny_model(5, 3, 4, nn::HeadMode::kSigmoid);
  const auto r = proposed_detect(model, frame, cb, ModulationScheme::qpsk(), {0.999999, {}});
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(r.supports[s].empty());
    CHECK(r.sparsity[s] == 0);
    CHECK(r.bits[s].empty());
    CHECK(r.flags[s] == std::vector<std::string>{"empty-support"});
  }
}

TEST_CASE("pipeline is pure: repeated runs give identical results") {
  const auto cb = random_codebook(5, 3, 7);
  const auto frame = make_frame(cb, 2, 4, 0.1, 9);
  auto model = std::make_shared<AudModel>(tiny_model(5, 3, 4, nn::HeadMode::kSigmoid));
  const auto qpsk = ModulationScheme::qpsk();
  const auto det = make_network_detector("proposed", model, cb, qpsk, {0.3, {}});
  CHECK(det->name() == "proposed");
  const auto a = det->detect(frame);
  const auto b = det->detect(frame);
  CHECK(a == b);
  CHECK(a == proposed_detect(*model, frame, cb, qpsk, {0.3, {}}));
  CHECK_THROWS_AS(make_network_detector("proposed", nullptr, cb, qpsk, {}), ConfigError);

  const auto omp = make_ls_omp_detector(cb, qpsk, 2, DataMode::kOracleChannel);
  CHECK(omp->detect(frame) == omp->detect(frame));
  const auto oracle = make_oracle_ls_detector(cb, qpsk);
  CHECK(oracle->name() == "oracle-ls");
  CHECK(oracle->detect(frame).supports == frame.truth.activity.supports);
}
