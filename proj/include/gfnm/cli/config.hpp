// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gfnm/detect/detectors.hpp"
#include "gfnm/nn/features.hpp"
#include "gfnm/signal/frame.hpp"

namespace gfnm::cli {

/// Flat experiment description. Keys in the text form are the member names;
/// defaults follow the reference parameter table where it gives one.
struct ExperimentConfig {
  // System and data.
  std::size_t K = 200;
  std::size_t N = 100;
  std::size_t S = 20;
  std::size_t J = 7;
  double eta = 0.5;
  std::string modulation = "qpsk";
  double snr_min = 0.0;
  double snr_max = 20.0;
  bool path_loss = false;
  std::size_t U = 50000;

  // Detection.
  double tau = 0.5;
  detect::DataMode data_mode = detect::DataMode::kOracleChannel;
  bool rotation_invariant = false;

  // Network and training.
  std::size_t L = 3;
  std::size_t alpha = 1000;
  double psi = 1e-3;
  std::size_t B = 20;
  double rho_drop = 0.3;
  double validation_split = 0.2;
  double delta1 = 0.9;
  double delta2 = 0.99;
  double lambda = 1e-4;
  double positive_weight = 1.0;
  std::size_t epochs = 20;
  nn::HeadMode head_mode = nn::HeadMode::kSigmoid;
  nn::InputMode input_mode = nn::InputMode::kPerSlot;
  bool bidirectional = true;
  bool attention = true;
  std::size_t attention_span = 0;
  bool bias_correction = false;
  double clip_norm = 5.0;

  // Experiment plumbing.
  std::uint64_t seed = 1;
  std::size_t trials = 1000;
  double snr = 8.0;  // operating point for eval and non-SNR sweeps
  std::size_t workers = 1;
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Names of every key, in the order written by to_text.
std::vector<std::string> config_keys();

/// Sets one key from its text form. Throws ConfigError naming the key.
void set_field(ExperimentConfig& config, const std::string& key, const std::string& value);
std::string get_field(const ExperimentConfig& config, const std::string& key);

/// "key = value" lines; '#' starts a comment. Errors cite `source:line`.
/// Unmentioned keys keep their current value.
void apply_text(ExperimentConfig& config, const std::string& text, const std::string& source);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Every key, one per line; parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& config);

/// "key=value" override.
void apply_override(ExperimentConfig& config, const std::string& assignment);

/// Applies GFNM_SEED when set. Returns whether it did.
bool apply_seed_env(ExperimentConfig& config);

/// Rejects out-of-domain values with an error naming the field.
void validate(const ExperimentConfig& config);

SystemConfig system_config(const ExperimentConfig& config);
nn::ArchitectureConfig architecture(const ExperimentConfig& config);
nn::TrainConfig train_config(const ExperimentConfig& config);
detect::DetectorConfig detector_config(const ExperimentConfig& config);

}  // namespace gfnm::cli
