// SPDX-License-Identifier: Apache-2.0
#include "gfnm/cli/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gfnm/data/dataset.hpp"
#include "gfnm/errors.hpp"
#include "gfnm/eval/report.hpp"
#include "gfnm/io/binary.hpp"

namespace gfnm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Log {
  std::ostream* out;
  template <typename T>
  Log& operator<<(const T& v) {
    if (out) *out << v;
    return *this;
  }
};

RunManifest start_manifest(const std::string& command, const ExperimentConfig& config,
                           const RunContext& ctx) {
  RunManifest m;
  m.command = command;
  m.code_version = code_version();
  m.config = to_text(config);
  m.seed = config.seed;
  m.arguments = ctx.arguments;
  return m;
}

void ensure_parent(const fs::path& p) {
  const fs::path dir = p.parent_path();
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  return fs::path(p.string() + suffix);
}

}  // namespace

std::vector<std::string> detector_names() { return {"proposed", "lstm-cs", "ls-omp", "oracle-ls"}; }

std::vector<std::string> parse_detector_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string name;
  const auto valid = detector_names();
  while (std::getline(in, name, ',')) {
    if (name.empty()) continue;
    if (std::find(valid.begin(), valid.end(), name) == valid.end())
      throw ConfigError("detectors: unknown '" + name + "' (valid: proposed, lstm-cs, ls-omp, oracle-ls)");
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  if (out.empty()) throw ConfigError("detectors: at least one required");
  return out;
}

std::string training_metadata(const ExperimentConfig& c, const std::string& dataset_sha256) {
  json j;
  j["K"] = c.K;
  j["N"] = c.N;
  j["S"] = c.S;
  j["J"] = c.J;
  j["eta"] = c.eta;
  j["codebook_seed"] = c.seed;
  j["input_mode"] = nn::to_string(c.input_mode);
  j["snr_min"] = c.snr_min;
  j["snr_max"] = c.snr_max;
  j["dataset_sha256"] = dataset_sha256;
  return j.dump();
}

std::shared_ptr<const detect::AudModel> load_model(const fs::path& checkpoint,
                                                   const ExperimentConfig& config) {
  nn::Checkpoint ck = nn::load_checkpoint(checkpoint);
  auto model = std::make_shared<detect::AudModel>();
  model->input = config.input_mode;
  try {
    const json meta = json::parse(ck.metadata);
    if (meta.contains("codebook_seed")) {
      const auto seed = meta.at("codebook_seed").get<std::uint64_t>();
      if (seed != config.seed)
        throw ConfigError("seed: checkpoint " + checkpoint.string() + " was trained on codebook seed " +
                          std::to_string(seed) + ", config seed is " + std::to_string(config.seed));
    }
    if (meta.contains("input_mode"))
      model->input = nn::parse_input_mode(meta.at("input_mode").get<std::string>());
  } catch (const json::exception& e) {
    throw DataError("checkpoint metadata: " + std::string(e.what()));
  }
  model->params = std::move(ck.params);
  model->config = ck.config;
  return model;
}

std::vector<eval::DetectorSpec> make_detector_specs(const ExperimentConfig& config,
                                                    const SweepOptions& options) {
  std::vector<eval::DetectorSpec> specs;
  const detect::DetectorConfig dcfg = detector_config(config);
  for (const std::string& name : options.detectors) {
    if (name == "proposed" || name == "lstm-cs") {
      const auto& path = name == "proposed" ? options.checkpoint : options.lstm_cs_checkpoint;
      if (!path)
        throw ConfigError("detector '" + name + "' needs " +
                          (name == "proposed" ? "--checkpoint" : "--lstm-cs-checkpoint"));
      auto model = load_model(*path, config);
      if (name == "lstm-cs" && (model->params.shape.bidirectional || model->params.shape.attention))
        throw ConfigError("lstm-cs: checkpoint must be unidirectional without attention");
      specs.push_back({name, [name, model, dcfg](const FrameGenerator& g) {
                         return detect::make_network_detector(name, model, g.codebook(),
                                                              g.modulation(), dcfg);
                       }});
    } else if (name == "ls-omp") {
      const auto mode = config.data_mode;
      specs.push_back({name, [mode](const FrameGenerator& g) {
                         return detect::make_ls_omp_detector(g.codebook(), g.modulation(),
                                                             g.config().sparsity, mode);
                       }});
    } else if (name == "oracle-ls") {
      specs.push_back({name, [](const FrameGenerator& g) {
                         return detect::make_oracle_ls_detector(g.codebook(), g.modulation());
                       }});
    } else {
      parse_detector_list(name);  // throws with the valid names
    }
  }
  return specs;
}

RunManifest cmd_gen_data(const ExperimentConfig& config, const GenDataOptions& options,
                         const RunContext& ctx) {
  validate(config);
  Log log{ctx.log};
  const auto t0 = Clock::now();
  const std::size_t count = options.count.value_or(config.U);
  const fs::path out = options.out.empty() ? fs::path(config.output_dir) / "dataset.gfnm" : options.out;
  ensure_parent(out);

  const FrameGenerator generator(system_config(config), config.seed);
  log << "gen-data: " << count << " frames, K=" << config.K << " N=" << config.N << " S=" << config.S
      << " J=" << config.J << " eta=" << config.eta << "\n";
  const data::Dataset dataset =
      data::generate_dataset(generator, count, config.snr_min, config.snr_max, 0);
  const double t_gen = seconds_since(t0);
  data::save_dataset(dataset, out);
  const fs::path sidecar = sibling(out, ".jsonl");
  io::write_file_atomic(sidecar, data::dataset_sidecar(dataset));

  RunManifest m = start_manifest("gen-data", config, ctx);
  m.add_output(out);
  m.add_output(sidecar);
  m.timings = {{"generate", t_gen}, {"total", seconds_since(t0)}};
  write_manifest(m, sibling(out, ".manifest.json"));
  log << "gen-data: wrote " << out.string() << "\n";
  return m;
}

RunManifest cmd_train(const ExperimentConfig& config, const TrainOptions& options,
                      const RunContext& ctx) {
  validate(config);
  Log log{ctx.log};
  const auto t0 = Clock::now();
  const data::Dataset dataset = data::load_dataset(options.dataset);
  data::check_compatible(dataset.header, system_config(config));
  if (dataset.header.seed != config.seed)
    log << "train: note: dataset seed " << dataset.header.seed << " differs from config seed "
        << config.seed << "; evaluate with seed " << dataset.header.seed << "\n";
  const std::string dataset_hash = io::sha256_file(options.dataset);

  const nn::NetworkShape shape = nn::network_shape(config.K, config.N, config.J, architecture(config));
  const nn::TrainConfig tc = train_config(config);
  nn::NetworkParams init;
  std::optional<nn::AdamState> optimizer;
  std::size_t completed = 0;
  if (options.resume) {
    nn::Checkpoint ck = nn::load_checkpoint(*options.resume);
    if (!(ck.params.shape == shape))
      throw ConfigError("resume: checkpoint network shape differs from the configured one");
    init = std::move(ck.params);
    optimizer = std::move(ck.optimizer);
    completed = ck.completed_epochs;
    log << "train: resuming after epoch " << completed << ", step " << optimizer->step << "\n";
  } else {
    init = nn::initialize(shape, config.seed);
  }

  const data::DatasetSamples samples(dataset, config.input_mode);
  log << "train: " << samples.size() << " samples, " << nn::parameter_count(shape)
      << " parameters, " << config.epochs << " epochs\n";
  auto t_epoch = Clock::now();
  nn::TrainResult result = nn::train(
      samples, tc, std::move(init), config.epochs, std::move(optimizer), completed,
      [&](const nn::StepReport& s) {
        if (s.step % 200 == 0)
          log << "  epoch " << s.epoch << " step " << s.step << " loss " << s.loss << "\n";
      });
  for (const auto& e : result.history)
    log << "train: epoch " << e.epoch << " train " << e.train_loss << " val " << e.validation_loss
        << "\n";
  const double t_train = seconds_since(t_epoch);

  const fs::path out = options.out.empty() ? fs::path(config.output_dir) / "model.gfnc" : options.out;
  ensure_parent(out);
  // The codebook follows the dataset, whatever seed drove the training RNG.
  ExperimentConfig trained_on = config;
  trained_on.seed = dataset.header.seed;
  nn::Checkpoint ck{std::move(result.params), std::move(result.optimizer), tc,
                    completed + config.epochs, training_metadata(trained_on, dataset_hash)};
  nn::save_checkpoint(ck, out);
  const fs::path losses = sibling(out, ".loss.csv");
  io::write_file_atomic(losses, nn::loss_csv(result.history));

  RunManifest m = start_manifest("train", config, ctx);
  m.add_input(options.dataset);
  if (options.resume) m.add_input(*options.resume);
  m.add_output(out);
  m.add_output(losses);
  m.timings = {{"train", t_train}, {"total", seconds_since(t0)}};
  write_manifest(m, sibling(out, ".manifest.json"));
  log << "train: wrote " << out.string() << "\n";
  return m;
}

RunManifest cmd_sweep(const ExperimentConfig& config, const SweepOptions& options,
                      const RunContext& ctx) {
  validate(config);
  Log log{ctx.log};
  const auto t0 = Clock::now();
  eval::SweepConfig sc;
  sc.system = system_config(config);
  sc.seed = config.seed;
  sc.axis = options.values.empty() ? eval::SweepAxis::kSnr : options.axis;
  sc.values = options.values.empty() ? std::vector<double>{config.snr} : options.values;
  sc.snr_db = config.snr;
  sc.trials = config.trials;
  sc.workers = config.workers;
  sc.rotation_invariant = config.rotation_invariant;
  eval::validate(sc);
  const auto specs = make_detector_specs(config, options);

  const fs::path dir(config.output_dir);
  const fs::path csv = dir / (options.prefix + ".metrics.csv");
  const fs::path frames = dir / (options.prefix + ".detections.jsonl");
  ensure_parent(csv);
  std::ofstream frame_out;
  const fs::path frames_tmp = sibling(frames, ".tmp");
  if (options.write_frames) {
    frame_out.open(frames_tmp, std::ios::binary | std::ios::trunc);
    if (!frame_out) throw DataError("cannot write " + frames_tmp.string());
  }
  const ModulationScheme qpsk = ModulationScheme::qpsk();
  eval::FrameCallback on_frame;
  if (options.write_frames)
    on_frame = [&](const eval::FrameOutcome& o) { frame_out << eval::detection_json_lines(o, qpsk); };

  log << "sweep: axis " << eval::to_string(sc.axis) << ", " << sc.values.size() << " points, "
      << sc.trials << " trials, detectors";
  for (const auto& s : specs) log << " " << s.name;
  log << "\n";
  const eval::MetricsReport report = eval::run_monte_carlo(sc, specs, on_frame);
  const double t_run = seconds_since(t0);
  for (const auto& r : report.records) {
    char line[256];
    std::snprintf(line, sizeof line, "  %s=%g %-10s rho_d %.4f±%.4f  ber %.4f±%.4f  fa %.4f\n",
                  eval::to_string(sc.axis), r.axis_value, r.detector.c_str(), r.rho_d.mean,
                  r.rho_d.ci, r.ber.mean, r.ber.ci, r.false_alarm.mean);
    log << line;
  }

  RunManifest m = start_manifest("sweep", config, ctx);
  if (options.checkpoint) m.add_input(*options.checkpoint);
  if (options.lstm_cs_checkpoint) m.add_input(*options.lstm_cs_checkpoint);
  io::write_file_atomic(csv, eval::metrics_csv(report));
  m.add_output(csv);
  for (eval::Metric metric : {eval::Metric::kDetection, eval::Metric::kAccuracy, eval::Metric::kBer,
                              eval::Metric::kFalseAlarm}) {
    const fs::path svg = dir / (options.prefix + "." + eval::to_string(metric) + ".svg");
    io::write_file_atomic(svg, eval::render_svg(eval::metric_plot(report, metric)));
    m.add_output(svg);
  }
  if (options.write_frames) {
    frame_out.close();
    if (!frame_out) throw DataError("failed writing " + frames_tmp.string());
    fs::rename(frames_tmp, frames);
    m.add_output(frames);
  }
  m.timings = {{"monte_carlo", t_run}, {"total", seconds_since(t0)}};
  write_manifest(m, dir / (options.prefix + ".manifest.json"));
  log << "sweep: wrote " << csv.string() << "\n";
  return m;
}

RunManifest cmd_flops(const ExperimentConfig& config, const FlopsOptions& options,
                      std::ostream& out, const RunContext& ctx) {
  validate(config);
  const auto t0 = Clock::now();
  if (options.sparsity.empty()) throw ConfigError("S range: at least one value required");
  const auto techniques = options.techniques.empty() ? eval::all_techniques() : options.techniques;
  std::vector<eval::FlopRow> rows;
  for (eval::Technique t : techniques)
    for (std::size_t s : options.sparsity) {
      eval::FlopModel fm;
      fm.technique = t;
      fm.devices = config.K;
      fm.subcarriers = config.N;
      fm.hidden_layers = config.L;
      fm.width = config.alpha;
      fm.sparsity = s;
      fm.input_slots = config.input_mode == nn::InputMode::kFullFrame ? config.J : 1;
      rows.push_back({t, s, eval::flops(fm)});
    }
  const std::string csv = eval::flops_csv(rows);
  out << csv;
  const fs::path path = fs::path(config.output_dir) / "flops.csv";
  ensure_parent(path);
  io::write_file_atomic(path, csv);
  RunManifest m = start_manifest("flops", config, ctx);
  m.add_output(path);
  m.timings = {{"total", seconds_since(t0)}};
  write_manifest(m, fs::path(config.output_dir) / "flops.manifest.json");
  return m;
}

}  // namespace gfnm::cli
