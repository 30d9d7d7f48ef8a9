// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "gfnm/errors.hpp"
#include "gfnm/nn/network.hpp"

namespace gfnm::nn {

namespace {

using Eigen::Index;

Index idx(std::size_t n) { return static_cast<Index>(n); }

template <class Params, class F>
void visit_trainable(Params& p, F&& f) {
  f(std::string("input.weights"), p.input_weights);
  f(std::string("input.norm.scale"), p.input_norm.scale);
  f(std::string("input.norm.shift"), p.input_norm.shift);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& layer = p.layers[l];
    const std::string prefix = "layer" + std::to_string(l + 1) + ".";
    f(prefix + "forward.input_weights", layer.forward.input_weights);
    f(prefix + "forward.recurrent_weights", layer.forward.recurrent_weights);
    f(prefix + "forward.bias", layer.forward.bias);
    if (p.shape.bidirectional) {
      f(prefix + "backward.input_weights", layer.backward.input_weights);
      f(prefix + "backward.recurrent_weights", layer.backward.recurrent_weights);
      f(prefix + "backward.bias", layer.backward.bias);
    }
    f(prefix + "combine", layer.combine);
    f(prefix + "norm.scale", layer.norm.scale);
    f(prefix + "norm.shift", layer.norm.shift);
  }
  if (p.shape.attention) {
    f(std::string("attention.query_weights"), p.attention.query_weights);
    f(std::string("attention.key_weights"), p.attention.key_weights);
    f(std::string("attention.bias"), p.attention.bias);
    f(std::string("attention.relevance"), p.attention.relevance);
  }
  f(std::string("head.weights"), p.head_weights);
  f(std::string("head.bias"), p.head_bias);
}

LstmCellParams zero_cell(std::size_t width, std::size_t input_width) {
  return {Matrix::Zero(idx(4 * width), idx(input_width)), Matrix::Zero(idx(4 * width), idx(width)),
          Vector::Zero(idx(4 * width))};
}

BatchNormParams unit_norm(std::size_t width, std::size_t steps) {
  return {Vector::Ones(idx(width)), Vector::Zero(idx(width)),
          {Matrix::Zero(idx(width), idx(steps)), Matrix::Ones(idx(width), idx(steps))}};
}

void check_cell(const LstmCellParams& p, Index input_width, const char* what) {
  const Index a = p.recurrent_weights.cols();
  if (p.recurrent_weights.rows() != 4 * a || p.input_weights.rows() != 4 * a ||
      p.input_weights.cols() != input_width || p.bias.size() != 4 * a)
    throw InputError(std::string(what) + ": LSTM parameter shapes do not match");
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void fill_uniform(Eigen::Ref<Matrix> m, double bound, RngStream& rng) {
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r) m(r, c) = bound * (2.0 * rng.uniform() - 1.0);
}

double xavier(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void init_cell(LstmCellParams& cell, std::size_t width, RngStream& rng) {
  const Index a = idx(width);
  const auto in = static_cast<std::size_t>(cell.input_weights.cols());
  for (Index g = 0; g < 4; ++g)
    fill_uniform(cell.input_weights.middleRows(g * a, a), xavier(in, width), rng);
  for (Index g = 0; g < 4; ++g)
    fill_uniform(cell.recurrent_weights.middleRows(g * a, a), xavier(width, width), rng);
  cell.bias.setZero();
  cell.bias.segment(a, a).setOnes();
}

}  // namespace

const char* to_string(HeadMode mode) { return mode == HeadMode::kSigmoid ? "sigmoid" : "softmax"; }

HeadMode parse_head_mode(const std::string& text) {
  if (text == "sigmoid") return HeadMode::kSigmoid;
  if (text == "softmax") return HeadMode::kSoftmax;
  throw ConfigError("head: expected sigmoid or softmax, got '" + text + "'");
}

void validate(const NetworkShape& s) {
  if (s.input_width == 0) throw ConfigError("input_width must be positive");
  if (s.steps == 0) throw ConfigError("steps must be positive");
  if (s.width == 0) throw ConfigError("alpha must be positive");
  if (s.hidden_layers == 0) throw ConfigError("L must be at least 1");
  if (s.devices == 0) throw ConfigError("K must be positive");
  if (s.slots_per_step == 0) throw ConfigError("slots_per_step must be positive");
}

NetworkParams NetworkParams::zeros(const NetworkShape& shape) {
  validate(shape);
  NetworkParams p;
  p.shape = shape;
  const std::size_t a = shape.width;
  p.input_weights = Matrix::Zero(idx(a), idx(shape.input_width));
  p.input_norm = unit_norm(a, shape.steps);
  p.input_norm.scale.setZero();
  p.input_norm.running.variance.setZero();
  for (std::size_t l = 0; l < shape.hidden_layers; ++l) {
    BilstmLayerParams layer;
    layer.forward = zero_cell(a, a);
    if (shape.bidirectional) layer.backward = zero_cell(a, a);
    layer.combine = Matrix::Zero(idx(a), idx(shape.directions() * a));
    layer.norm = unit_norm(a, shape.steps);
    layer.norm.scale.setZero();
    layer.norm.running.variance.setZero();
    p.layers.push_back(std::move(layer));
  }
  if (shape.attention) {
    p.attention = {Matrix::Zero(idx(a), idx(a)), Matrix::Zero(idx(a), idx(a)), Vector::Zero(idx(a)),
                   Vector::Zero(idx(a))};
  }
  p.head_weights = Matrix::Zero(idx(shape.outputs()), idx(a));
  p.head_bias = Vector::Zero(idx(shape.outputs()));
  return p;
}

std::vector<TensorView> trainable_tensors(NetworkParams& params) {
  std::vector<TensorView> out;
  visit_trainable(params, [&](std::string name, auto& t) {
    out.push_back({std::move(name), {t.data(), static_cast<std::size_t>(t.size())}});
  });
  return out;
}

std::vector<ConstTensorView> trainable_tensors(const NetworkParams& params) {
  std::vector<ConstTensorView> out;
  visit_trainable(params, [&](std::string name, const auto& t) {
    out.push_back({std::move(name), {t.data(), static_cast<std::size_t>(t.size())}});
  });
  return out;
}

std::size_t parameter_count(const NetworkShape& s) {
  const std::size_t a = s.width;
  const std::size_t d = s.directions();
  std::size_t n = a * s.input_width + 2 * a;
  n += s.hidden_layers * (d * (8 * a * a + 4 * a) + d * a * a + 2 * a);
  if (s.attention) n += 2 * a * a + 2 * a;
  n += s.outputs() * a + s.outputs();
  return n;
}

std::size_t registered_parameter_count(const NetworkParams& params) {
  std::size_t n = 0;
  for (const auto& t : trainable_tensors(params)) n += t.values.size();
  return n;
}

NetworkParams initialize(const NetworkShape& shape, std::uint64_t seed) {
  NetworkParams p = NetworkParams::zeros(shape);
  RngStream rng(seed, 0x1417);
  const std::size_t a = shape.width;
  fill_uniform(p.input_weights, xavier(shape.input_width, a), rng);
  p.input_norm.scale.setOnes();
  p.input_norm.running.variance.setOnes();
  for (auto& layer : p.layers) {
    init_cell(layer.forward, a, rng);
    if (shape.bidirectional) init_cell(layer.backward, a, rng);
    fill_uniform(layer.combine, xavier(shape.directions() * a, a), rng);
    layer.norm.scale.setOnes();
    layer.norm.running.variance.setOnes();
  }
  if (shape.attention) {
    fill_uniform(p.attention.query_weights, xavier(a, a), rng);
    fill_uniform(p.attention.key_weights, xavier(a, a), rng);
    fill_uniform(p.attention.relevance, xavier(a, 1), rng);
  }
  fill_uniform(p.head_weights, xavier(a, shape.outputs()), rng);
  return p;
}

double squared_norm(const NetworkParams& params) {
  double s = 0.0;
  for (const auto& t : trainable_tensors(params))
    for (double v : t.values) s += v * v;
  return s;
}

LstmState lstm_cell_forward(const Vector& input, const Vector& hidden_prev, const Vector& cell_prev,
                            const LstmCellParams& params) {
  const Index a = params.recurrent_weights.cols();
  check_cell(params, input.size(), "lstm_cell_forward");
  if (hidden_prev.size() != a || cell_prev.size() != a)
    throw InputError("lstm_cell_forward: state width does not match the cell");
  const Vector pre = params.input_weights * input + params.recurrent_weights * hidden_prev + params.bias;
  LstmState out{Vector(a), Vector(a)};
  for (Index r = 0; r < a; ++r) {
    const double i = sigmoid(pre(r));
    const double f = sigmoid(pre(a + r));
    const double g = std::tanh(pre(2 * a + r));
    const double o = sigmoid(pre(3 * a + r));
    out.cell(r) = f * cell_prev(r) + i * g;
    out.hidden(r) = o * std::tanh(out.cell(r));
  }
  return out;
}

BilstmStates bilstm_states(const std::vector<Vector>& sequence, const LstmCellParams& forward,
                           const LstmCellParams& backward) {
  if (sequence.empty()) throw InputError("bilstm_layer_forward: empty sequence");
  const std::size_t steps = sequence.size();
  BilstmStates out{std::vector<Vector>(steps), std::vector<Vector>(steps)};
  const Index af = forward.recurrent_weights.cols();
  LstmState state{Vector::Zero(af), Vector::Zero(af)};
  for (std::size_t t = 0; t < steps; ++t) {
    state = lstm_cell_forward(sequence[t], state.hidden, state.cell, forward);
    out.forward[t] = state.hidden;
  }
  const Index ab = backward.recurrent_weights.cols();
  state = {Vector::Zero(ab), Vector::Zero(ab)};
  for (std::size_t t = steps; t-- > 0;) {
    state = lstm_cell_forward(sequence[t], state.hidden, state.cell, backward);
    out.backward[t] = state.hidden;
  }
  return out;
}

std::vector<Vector> bilstm_layer_forward(const std::vector<Vector>& sequence,
                                         const LstmCellParams& forward,
                                         const LstmCellParams& backward, const Matrix& combine,
                                         const Vector& combine_bias) {
  const BilstmStates states = bilstm_states(sequence, forward, backward);
  const Index width = forward.recurrent_weights.cols() + backward.recurrent_weights.cols();
  if (combine.cols() != width || combine.rows() != combine_bias.size())
    throw InputError("bilstm_layer_forward: combine shape does not match the states");
  std::vector<Vector> out;
  out.reserve(sequence.size());
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    Vector joined(width);
    joined << states.forward[t], states.backward[t];
    out.push_back(combine * joined + combine_bias);
  }
  return out;
}

Matrix batchnorm_forward(const Matrix& batch, const Vector& scale, const Vector& shift, Mode mode,
                         RunningStats* running, std::size_t step, double epsilon,
                         double momentum) {
  const Index width = batch.rows();
  const Index n = batch.cols();
  if (scale.size() != width || shift.size() != width)
    throw InputError("batchnorm_forward: scale/shift width does not match the batch");
  if (running && (running->mean.rows() != width || idx(step) >= running->mean.cols()))
    throw InputError("batchnorm_forward: running statistics do not cover this step");
  Vector mean, var;
  if (mode == Mode::kTrain) {
    if (n < 2) throw InputError("batchnorm_forward: training mode needs a batch of at least 2");
    mean = batch.rowwise().mean();
    var = (batch.colwise() - mean).array().square().rowwise().mean();
    if (running) {
      running->mean.col(idx(step)) = (1.0 - momentum) * running->mean.col(idx(step)) + momentum * mean;
      running->variance.col(idx(step)) =
          (1.0 - momentum) * running->variance.col(idx(step)) + momentum * var;
    }
  } else {
    if (!running) throw StateError("batchnorm_forward: inference mode needs running statistics");
    mean = running->mean.col(idx(step));
    var = running->variance.col(idx(step));
  }
  const Vector inv = (var.array() + epsilon).rsqrt();
  Matrix out = (batch.colwise() - mean);
  out = (out.array().colwise() * (inv.array() * scale.array())).colwise() + shift.array();
  return out;
}

AttentionResult attention_forward(const std::vector<Vector>& history, const Vector& query,
                                  const AttentionParams& params, std::size_t span) {
  if (history.empty()) throw InputError("attention_forward: empty history");
  const Index a = params.query_weights.rows();
  if (query.size() != params.query_weights.cols() || params.key_weights.rows() != a ||
      params.bias.size() != a || params.relevance.size() != a)
    throw InputError("attention_forward: parameter shapes do not match");
  const std::size_t n = span == 0 ? history.size() : std::min(span, history.size());
  const Vector projected = params.query_weights * query + params.bias;
  AttentionResult out{Vector::Zero(history.back().size()), Vector(idx(n)), Vector(idx(n))};
  for (std::size_t k = 0; k < n; ++k) {
    const Vector& v = history[history.size() - 1 - k];
    out.scores(idx(k)) =
        params.relevance.dot((projected + params.key_weights * v).array().tanh().matrix());
  }
  const double top = out.scores.maxCoeff();
  out.weights = (out.scores.array() - top).exp();
  out.weights /= out.weights.sum();
  for (std::size_t k = 0; k < n; ++k)
    out.output += out.weights(idx(k)) * history[history.size() - 1 - k];
  return out;
}

}  // namespace gfnm::nn
