// SPDX-License-Identifier: Apache-2.0
// gfnm: dataset generation, training, evaluation, sweeps and flop tables.
#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gfnm/cli/commands.hpp"
#include "gfnm/errors.hpp"

namespace {

using namespace gfnm;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "key = value config file");
  sub->add_option("--set", c.overrides, "override one key, key=value (repeatable)");
  sub->add_flag("-q,--quiet", c.quiet, "no progress output");
}

// file < GFNM_SEED < --set
cli::ExperimentConfig resolve(const Common& c) {
  cli::ExperimentConfig config;
  if (!c.config_path.empty()) config = cli::load_config(c.config_path);
  cli::apply_seed_env(config);
  for (const auto& o : c.overrides) cli::apply_override(config, o);
  cli::validate(config);
  return config;
}

template <typename T>
std::vector<T> split_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::istringstream v(item);
    T x{};
    if (!(v >> x) || !v.eof()) throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
    out.push_back(x);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grant-free NOMA detection workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::code_version());

  const std::vector<std::string> arguments(argv + 1, argv + argc);

  Common gen_c, train_c, eval_c, sweep_c, flops_c;

  auto* gen = app.add_subcommand("gen-data", "generate a training dataset");
  add_common(gen, gen_c);
  cli::GenDataOptions gen_o;
  std::size_t count = 0;
  auto* count_opt = gen->add_option("--count", count, "frames (default: U)");
  gen->add_option("-o,--out", gen_o.out, "dataset path (default: <output_dir>/dataset.gfnm)");

  auto* train = app.add_subcommand("train", "train the activity detector");
  add_common(train, train_c);
  cli::TrainOptions train_o;
  std::string resume;
  train->add_option("-d,--dataset", train_o.dataset, "dataset file")->required();
  train->add_option("-o,--out", train_o.out, "checkpoint path (default: <output_dir>/model.gfnc)");
  train->add_option("--resume", resume, "continue from this checkpoint");

  // eval is a sweep over the single point `snr`.
  cli::SweepOptions eval_o, sweep_o;
  std::string eval_det, sweep_det, eval_ckpt, sweep_ckpt, eval_lstm, sweep_lstm;
  auto add_eval_opts = [](CLI::App* sub, std::string& det, std::string& ckpt, std::string& lstm,
                          cli::SweepOptions& o) {
    sub->add_option("--detectors", det, "comma list: proposed,lstm-cs,ls-omp,oracle-ls");
    sub->add_option("--checkpoint", ckpt, "model for 'proposed'");
    sub->add_option("--lstm-cs-checkpoint", lstm, "unidirectional model for 'lstm-cs'");
    sub->add_flag("--frames", o.write_frames, "also write per-slot detections as JSON lines");
    sub->add_option("--prefix", o.prefix, "output file prefix");
  };
  auto* ev = app.add_subcommand("eval", "evaluate detectors at one operating point");
  add_common(ev, eval_c);
  add_eval_opts(ev, eval_det, eval_ckpt, eval_lstm, eval_o);
  eval_o.prefix = "eval";

  auto* sweep = app.add_subcommand("sweep", "evaluate detectors along an axis");
  add_common(sweep, sweep_c);
  add_eval_opts(sweep, sweep_det, sweep_ckpt, sweep_lstm, sweep_o);
  std::string axis = "snr", values;
  double start = 0, stop = 0, step = 0;
  sweep->add_option("--axis", axis, "snr, sparsity, devices or eta");
  auto* start_opt = sweep->add_option("--start", start);
  auto* stop_opt = sweep->add_option("--stop", stop);
  auto* step_opt = sweep->add_option("--step", step);
  sweep->add_option("--values", values, "explicit comma list instead of start/stop/step");

  auto* flops = app.add_subcommand("flops", "analytic flop counts per technique");
  add_common(flops, flops_c);
  std::string techniques, sparsity;
  flops->add_option("--techniques", techniques, "comma list: ls-omp,d-aud,lstm-cs,proposed");
  flops->add_option("--S", sparsity, "comma list of sparsity values (default 10,20,30,40)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      const auto config = resolve(gen_c);
      if (count_opt->count() > 0) gen_o.count = count;
      cli::cmd_gen_data(config, gen_o, {gen_c.quiet ? nullptr : &std::cerr, arguments});
    } else if (train->parsed()) {
      const auto config = resolve(train_c);
      if (!resume.empty()) train_o.resume = resume;
      cli::cmd_train(config, train_o, {train_c.quiet ? nullptr : &std::cerr, arguments});
    } else if (ev->parsed() || sweep->parsed()) {
      const bool is_sweep = sweep->parsed();
      const Common& c = is_sweep ? sweep_c : eval_c;
      cli::SweepOptions& o = is_sweep ? sweep_o : eval_o;
      const auto config = resolve(c);
      const std::string& det = is_sweep ? sweep_det : eval_det;
      const std::string& ckpt = is_sweep ? sweep_ckpt : eval_ckpt;
      const std::string& lstm = is_sweep ? sweep_lstm : eval_lstm;
      if (!det.empty()) o.detectors = cli::parse_detector_list(det);
      if (!ckpt.empty()) o.checkpoint = ckpt;
      if (!lstm.empty()) o.lstm_cs_checkpoint = lstm;
      if (is_sweep) {
        o.axis = eval::parse_sweep_axis(axis);
        if (!values.empty()) {
          o.values = split_list<double>(values, "values");
        } else {
          if (!start_opt->count() || !stop_opt->count() || !step_opt->count())
            throw ConfigError("sweep: give --start, --stop and --step, or --values");
          o.values = eval::axis_range(start, stop, step);
        }
      }
      cli::cmd_sweep(config, o, {c.quiet ? nullptr : &std::cerr, arguments});
    } else if (flops->parsed()) {
      const auto config = resolve(flops_c);
      cli::FlopsOptions o;
      for (const auto& t : split_list<std::string>(techniques, "techniques"))
        o.techniques.push_back(eval::parse_technique(t));
      if (!sparsity.empty()) o.sparsity = split_list<std::size_t>(sparsity, "S");
      cli::cmd_flops(config, o, std::cout, {flops_c.quiet ? nullptr : &std::cerr, arguments});
    }
  } catch (const std::exception& e) {
    std::cerr << "gfnm: error: " << e.what() << "\n";
    return exit_code(e);
  }
  return 0;
}
