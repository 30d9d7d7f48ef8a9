// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gfnm/nn/network.hpp"

namespace gfnm::nn {

struct Sample {
  Matrix input;   // d_in × steps
  Matrix labels;  // K_out × steps
};

class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::size_t size() const = 0;
  virtual Sample sample(std::size_t index) const = 0;
};

class InMemorySamples : public SampleSource {
 public:
  explicit InMemorySamples(std::vector<Sample> samples) : samples_(std::move(samples)) {}
  std::size_t size() const override { return samples_.size(); }
  Sample sample(std::size_t index) const override { return samples_.at(index); }

 private:
  std::vector<Sample> samples_;
};

/// Stacks samples column-wise (step-major) into one batch.
SequenceBatch make_batch(const std::vector<Sample>& samples, std::size_t steps);
Matrix make_labels(const std::vector<Sample>& samples, std::size_t steps);

struct EpochLoss {
  std::size_t epoch = 0;  // 1-based, continues across resumes
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct StepReport {
  std::size_t epoch = 0;
  std::uint64_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
};

struct TrainResult {
  NetworkParams params;
  AdamState optimizer;
  std::vector<EpochLoss> history;
};

/// Index split: the first (1 − validation_split) of the source trains, the
/// rest validates. Each epoch visits the training part in a shuffled order
/// drawn from (seed, epoch); a trailing batch smaller than 2 is dropped.
/// The epoch's training loss is the mean training-mode objective over its
/// batches; the validation loss is the inference-mode objective.
/// Throws ConfigError for an empty source or fewer than 2 training samples.
TrainResult train(const SampleSource& data, const TrainConfig& config, NetworkParams init,
                  std::size_t epochs, std::optional<AdamState> resume = std::nullopt,
                  std::size_t completed_epochs = 0,
                  const std::function<void(const StepReport&)>& on_step = {});

/// Inference-mode objective over `indices`, batched by config.batch_size.
double evaluate_loss(const SampleSource& data, const std::vector<std::size_t>& indices,
                     const NetworkParams& params, const TrainConfig& config);

/// epoch,train_loss,val_loss
std::string loss_csv(const std::vector<EpochLoss>& history);

}  // namespace gfnm::nn
