// SPDX-License-Identifier: Apache-2.0
#include "gfnm/nn/train.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "gfnm/errors.hpp"

namespace gfnm::nn {

namespace {

using Eigen::Index;

constexpr std::uint64_t kShuffleDomain = 0x5A0F;
constexpr std::uint64_t kDropoutDomain = 0xD50;

std::vector<Sample> gather(const SampleSource& data, const std::vector<std::size_t>& indices,
                           std::size_t first, std::size_t count) {
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = first; i < first + count; ++i) out.push_back(data.sample(indices[i]));
  return out;
}

}  // namespace

SequenceBatch make_batch(const std::vector<Sample>& samples, std::size_t steps) {
  if (samples.empty()) throw InputError("make_batch: no samples");
  const Index rows = samples.front().input.rows();
  const Index b = static_cast<Index>(samples.size());
  SequenceBatch batch{Matrix(rows, static_cast<Index>(steps) * b), steps, samples.size()};
  for (Index s = 0; s < b; ++s) {
    const Matrix& x = samples[static_cast<std::size_t>(s)].input;
    if (x.rows() != rows || x.cols() != static_cast<Index>(steps))
      throw InputError("make_batch: sample " + std::to_string(s) + " has shape " +
                       std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    for (Index t = 0; t < x.cols(); ++t) batch.data.col(t * b + s) = x.col(t);
  }
  return batch;
}

Matrix make_labels(const std::vector<Sample>& samples, std::size_t steps) {
  const Index rows = samples.front().labels.rows();
  const Index b = static_cast<Index>(samples.size());
  Matrix out(rows, static_cast<Index>(steps) * b);
  for (Index s = 0; s < b; ++s) {
    const Matrix& y = samples[static_cast<std::size_t>(s)].labels;
    if (y.rows() != rows || y.cols() != static_cast<Index>(steps))
      throw InputError("make_labels: sample " + std::to_string(s) + " has a mismatched label shape");
    for (Index t = 0; t < y.cols(); ++t) out.col(t * b + s) = y.col(t);
  }
  return out;
}

double evaluate_loss(const SampleSource& data, const std::vector<std::size_t>& indices,
                     const NetworkParams& params, const TrainConfig& config) {
  if (indices.empty()) return std::nan("");
  double total = 0.0;
  for (std::size_t first = 0; first < indices.size(); first += config.batch_size) {
    const std::size_t count = std::min(config.batch_size, indices.size() - first);
    const auto samples = gather(data, indices, first, count);
    const SequenceBatch batch = make_batch(samples, params.shape.steps);
    const ForwardTrace trace = network_forward(batch, params, config, Mode::kInference);
    total += static_cast<double>(count) *
             config.data_weight * data_loss(trace, make_labels(samples, params.shape.steps), config);
  }
  return total / static_cast<double>(indices.size()) + config.l2 * squared_norm(params);
}

TrainResult train(const SampleSource& data, const TrainConfig& config, NetworkParams init,
                  std::size_t epochs, std::optional<AdamState> resume,
                  std::size_t completed_epochs,
                  const std::function<void(const StepReport&)>& on_step) {
  validate(config);
  if (data.size() == 0) throw ConfigError("train: empty dataset");
  const std::size_t total = data.size();
  const auto n_val = static_cast<std::size_t>(
      std::floor(static_cast<double>(total) * config.validation_split + 0.5));
  const std::size_t n_train = total - std::min(n_val, total);
  if (n_train < 2) throw ConfigError("train: fewer than 2 training samples after the split");

  std::vector<std::size_t> train_idx(n_train), val_idx(total - n_train);
  std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  std::iota(val_idx.begin(), val_idx.end(), n_train);

  TrainResult result{std::move(init), {}, {}};
  result.optimizer = resume ? std::move(*resume) : AdamState::for_params(result.params, config);
  const std::size_t steps = result.params.shape.steps;

  for (std::size_t e = 0; e < epochs; ++e) {
    const std::size_t epoch = completed_epochs + e + 1;
    RngStream shuffle = RngStream(config.seed, kShuffleDomain).derive(epoch);
    std::vector<std::size_t> order = train_idx;
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle.uniform_index(i)]);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first + 2 <= order.size(); first += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - first);
      if (count < 2) break;
      const auto samples = gather(data, order, first, count);
      const SequenceBatch batch = make_batch(samples, steps);
      const Matrix labels = make_labels(samples, steps);
      RngStream dropout = RngStream(config.seed, kDropoutDomain).derive(result.optimizer.step);
      const ForwardTrace trace =
          network_forward(batch, result.params, config, Mode::kTrain, &dropout);
      const double objective_value = objective(trace, labels, result.params, config);
      NetworkParams grads = network_backward(trace, labels, result.params, config);
      const double norm = clip_global_norm(grads, config.clip_norm);
      update_running_stats(result.params, trace, config.norm_momentum);
      adam_step(result.params, grads, result.optimizer);
      loss_sum += objective_value;
      ++batches;
      if (on_step) on_step({epoch, result.optimizer.step, objective_value, norm});
    }
    result.history.push_back({epoch, batches ? loss_sum / static_cast<double>(batches) : std::nan(""),
                              evaluate_loss(data, val_idx, result.params, config)});
  }
  return result;
}

std::string loss_csv(const std::vector<EpochLoss>& history) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,val_loss\n";
  for (const auto& h : history) out << h.epoch << ',' << h.train_loss << ',' << h.validation_loss << '\n';
  return out.str();
}

}  // namespace gfnm::nn
