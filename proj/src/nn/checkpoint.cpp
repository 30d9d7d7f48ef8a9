// SPDX-License-Identifier: Apache-2.0
#include "gfnm/nn/checkpoint.hpp"

#include "gfnm/errors.hpp"
#include "gfnm/io/binary.hpp"

namespace gfnm::nn {

namespace {

constexpr std::string_view kMagic = "GFNC";

void write_shape(io::BinaryWriter& w, const NetworkShape& s) {
  w.u64(s.input_width);
  w.u64(s.steps);
  w.u64(s.width);
  w.u64(s.hidden_layers);
  w.u64(s.devices);
  w.u64(s.slots_per_step);
  w.boolean(s.bidirectional);
  w.boolean(s.attention);
  w.u64(s.attention_span);
  w.u8(s.head == HeadMode::kSigmoid ? 0 : 1);
}

NetworkShape read_shape(io::BinaryReader& r) {
  NetworkShape s;
  s.input_width = r.u64();
  s.steps = r.u64();
  s.width = r.u64();
  s.hidden_layers = r.u64();
  s.devices = r.u64();
  s.slots_per_step = r.u64();
  s.bidirectional = r.boolean();
  s.attention = r.boolean();
  s.attention_span = r.u64();
  const auto head = r.u8();
  if (head > 1) throw DataError("checkpoint: unknown head mode " + std::to_string(head));
  s.head = head == 0 ? HeadMode::kSigmoid : HeadMode::kSoftmax;
  return s;
}

void write_config(io::BinaryWriter& w, const TrainConfig& c) {
  w.u64(c.batch_size);
  for (double v : {c.dropout, c.l2, c.threshold, c.validation_split, c.learning_rate, c.beta1,
                   c.beta2, c.epsilon})
    w.f64(v);
  w.boolean(c.bias_correction);
  for (double v : {c.clip_norm, c.data_weight, c.positive_weight, c.norm_epsilon, c.norm_momentum})
    w.f64(v);
  w.u64(c.seed);
}

TrainConfig read_config(io::BinaryReader& r) {
  TrainConfig c;
  c.batch_size = r.u64();
  for (double* v : {&c.dropout, &c.l2, &c.threshold, &c.validation_split, &c.learning_rate,
                    &c.beta1, &c.beta2, &c.epsilon})
    *v = r.f64();
  c.bias_correction = r.boolean();
  for (double* v : {&c.clip_norm, &c.data_weight, &c.positive_weight, &c.norm_epsilon,
                    &c.norm_momentum})
    *v = r.f64();
  c.seed = r.u64();
  return c;
}

template <class Params>
auto running_stats(Params& p) {
  using Ptr = decltype(&p.input_norm.running.mean);
  std::vector<std::pair<std::string, Ptr>> out{
      {"input.norm.running_mean", &p.input_norm.running.mean},
      {"input.norm.running_variance", &p.input_norm.running.variance}};
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l + 1) + ".norm.";
    out.push_back({prefix + "running_mean", &p.layers[l].norm.running.mean});
    out.push_back({prefix + "running_variance", &p.layers[l].norm.running.variance});
  }
  return out;
}

void write_tensors(io::BinaryWriter& w, const NetworkParams& p, const std::string& prefix) {
  for (const auto& t : trainable_tensors(p)) {
    w.string(prefix + t.name);
    w.u64(t.values.size());
    w.f64_array(t.values);
  }
}

void read_tensors(io::BinaryReader& r, NetworkParams& p, const std::string& prefix) {
  for (auto& t : trainable_tensors(p)) {
    const std::string name = r.string();
    if (name != prefix + t.name)
      throw DataError("checkpoint: expected tensor " + prefix + t.name + ", found " + name);
    const auto n = r.u64();
    if (n != t.values.size())
      throw DataError("checkpoint: tensor " + name + " has " + std::to_string(n) +
                      " values, shape requires " + std::to_string(t.values.size()));
    r.f64_array(t.values);
  }
}

}  // namespace

std::vector<std::uint8_t> serialize(const Checkpoint& c) {
  io::BinaryWriter w;
  w.magic(kMagic);
  w.u32(kCheckpointVersion);
  write_shape(w, c.params.shape);
  write_config(w, c.config);
  w.u64(c.completed_epochs);
  w.u64(c.optimizer.step);
  for (double v : {c.optimizer.learning_rate, c.optimizer.beta1, c.optimizer.beta2,
                   c.optimizer.epsilon})
    w.f64(v);
  w.boolean(c.optimizer.bias_correction);
  w.string(c.metadata);
  write_tensors(w, c.params, "");
  for (const auto& [name, m] : running_stats(c.params)) {
    w.string(name);
    w.u64(static_cast<std::uint64_t>(m->size()));
    w.f64_array({m->data(), static_cast<std::size_t>(m->size())});
  }
  write_tensors(w, c.optimizer.first_moment, "adam.m.");
  write_tensors(w, c.optimizer.second_moment, "adam.v.");
  return w.buffer();
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  io::BinaryReader r(bytes, "checkpoint");
  r.expect_magic(kMagic);
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint c;
  const NetworkShape shape = read_shape(r);
  try {
    validate(shape);
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint: invalid shape: ") + e.what());
  }
  constexpr std::size_t kMaxDim = std::size_t{1} << 24;
  for (std::size_t d : {shape.input_width, shape.steps, shape.width, shape.hidden_layers,
                        shape.devices, shape.slots_per_step})
    if (d > kMaxDim) throw DataError("checkpoint: implausible dimension " + std::to_string(d));
  if (parameter_count(shape) > bytes.size() / sizeof(double))
    throw DataError("checkpoint: declared shape needs more data than the file holds");
  c.config = read_config(r);
  c.completed_epochs = r.u64();
  c.params = NetworkParams::zeros(shape);
  c.optimizer.first_moment = NetworkParams::zeros(shape);
  c.optimizer.second_moment = NetworkParams::zeros(shape);
  c.optimizer.step = r.u64();
  for (double* v : {&c.optimizer.learning_rate, &c.optimizer.beta1, &c.optimizer.beta2,
                    &c.optimizer.epsilon})
    *v = r.f64();
  c.optimizer.bias_correction = r.boolean();
  c.metadata = r.string();
  read_tensors(r, c.params, "");
  for (const auto& [expected, m] : running_stats(c.params)) {
    const std::string name = r.string();
    if (name != expected) throw DataError("checkpoint: expected " + expected + ", found " + name);
    if (r.u64() != static_cast<std::uint64_t>(m->size()))
      throw DataError("checkpoint: " + name + " has the wrong size");
    r.f64_array({m->data(), static_cast<std::size_t>(m->size())});
  }
  read_tensors(r, c.optimizer.first_moment, "adam.m.");
  read_tensors(r, c.optimizer.second_moment, "adam.v.");
  if (!r.done()) throw DataError("checkpoint: trailing bytes after the last tensor");
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(io::read_file(path));
}

}  // namespace gfnm::nn
