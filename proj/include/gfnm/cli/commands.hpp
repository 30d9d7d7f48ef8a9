// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gfnm/cli/config.hpp"
#include "gfnm/cli/manifest.hpp"
#include "gfnm/detect/detectors.hpp"
#include "gfnm/eval/flops.hpp"
#include "gfnm/eval/monte_carlo.hpp"
#include "gfnm/nn/checkpoint.hpp"

namespace gfnm::cli {

/// Detector names accepted by eval and sweep.
std::vector<std::string> detector_names();
/// Splits "a,b,c" and rejects unknown names, listing the valid ones.
std::vector<std::string> parse_detector_list(const std::string& text);

/// Checkpoint metadata: the data the model was trained on.
std::string training_metadata(const ExperimentConfig& config, const std::string& dataset_sha256);

/// Model plus the input mode recorded at training time. Throws ConfigError
/// when the checkpoint was trained on a different codebook seed.
std::shared_ptr<const detect::AudModel> load_model(const std::filesystem::path& checkpoint,
                                                   const ExperimentConfig& config);

struct GenDataOptions {
  std::optional<std::size_t> count;  // defaults to config U
  std::filesystem::path out;         // defaults to <output_dir>/dataset.gfnm
};

struct TrainOptions {
  std::filesystem::path dataset;
  std::filesystem::path out;  // defaults to <output_dir>/model.gfnc
  std::optional<std::filesystem::path> resume;
};

struct SweepOptions {
  std::vector<std::string> detectors{"proposed", "ls-omp", "oracle-ls"};
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> lstm_cs_checkpoint;
  eval::SweepAxis axis = eval::SweepAxis::kSnr;
  std::vector<double> values;  // empty: the single point config.snr
  bool write_frames = false;   // detections.jsonl
  std::string prefix = "sweep";
};

struct FlopsOptions {
  std::vector<eval::Technique> techniques;  // empty: all
  std::vector<std::size_t> sparsity{10, 20, 30, 40};
};

struct RunContext {
  std::ostream* log = nullptr;          // progress lines; null for silence
  std::vector<std::string> arguments;   // recorded in the manifest
};

/// Each command validates the config, writes its outputs and a manifest
/// under config.output_dir (or the given paths), and returns the manifest.
RunManifest cmd_gen_data(const ExperimentConfig& config, const GenDataOptions& options,
                         const RunContext& context = {});
RunManifest cmd_train(const ExperimentConfig& config, const TrainOptions& options,
                      const RunContext& context = {});
RunManifest cmd_sweep(const ExperimentConfig& config, const SweepOptions& options,
                      const RunContext& context = {});
/// Also prints the CSV table to `out`.
RunManifest cmd_flops(const ExperimentConfig& config, const FlopsOptions& options,
                      std::ostream& out, const RunContext& context = {});

/// Detector factories for a sweep; loads checkpoints as needed.
std::vector<eval::DetectorSpec> make_detector_specs(const ExperimentConfig& config,
                                                    const SweepOptions& options);

}  // namespace gfnm::cli
