// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "gfnm/errors.hpp"
#include "gfnm/nn/network.hpp"

namespace gfnm::nn {

namespace {

using Eigen::Index;

Index idx(std::size_t n) { return static_cast<Index>(n); }

Matrix sigmoid(const Matrix& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

void check_finite(const Matrix& m, std::size_t layer) {
  if (!m.allFinite())
    throw NumericFault("network_forward: non-finite activation in layer " + std::to_string(layer));
}

void lstm_forward(const LstmCellParams& p, const Matrix& input, std::size_t steps,
                  std::size_t batch, bool reverse, LstmCache& c) {
  const Index a = idx(p.width());
  const Index b = idx(batch);
  const Index cols = input.cols();
  Matrix pre_all = p.input_weights * input;
  pre_all.colwise() += p.bias;
  c.gates.resize(4 * a, cols);
  c.cell.resize(a, cols);
  c.cell_tanh.resize(a, cols);
  c.hidden.resize(a, cols);
  Matrix h = Matrix::Zero(a, b);
  Matrix cell = Matrix::Zero(a, b);
  for (std::size_t s = 0; s < steps; ++s) {
    const Index col = idx(reverse ? steps - 1 - s : s) * b;
    Matrix pre = pre_all.middleCols(col, b);
    if (s > 0) pre.noalias() += p.recurrent_weights * h;
    auto gates = c.gates.middleCols(col, b);
    gates.topRows(a) = sigmoid(pre.topRows(a));
    gates.middleRows(a, a) = sigmoid(pre.middleRows(a, a));
    gates.middleRows(2 * a, a) = pre.middleRows(2 * a, a).array().tanh().matrix();
    gates.bottomRows(a) = sigmoid(pre.bottomRows(a));
    cell = (gates.middleRows(a, a).array() * cell.array() +
            gates.topRows(a).array() * gates.middleRows(2 * a, a).array())
               .matrix();
    c.cell.middleCols(col, b) = cell;
    c.cell_tanh.middleCols(col, b) = cell.array().tanh().matrix();
    h = (gates.bottomRows(a).array() * c.cell_tanh.middleCols(col, b).array()).matrix();
    c.hidden.middleCols(col, b) = h;
  }
}

/// Returns ∂/∂input and accumulates parameter gradients into `g`.
Matrix lstm_backward(const LstmCellParams& p, const Matrix& input, const LstmCache& c,
                     const Matrix& d_hidden, std::size_t steps, std::size_t batch, bool reverse,
                     LstmCellParams& g) {
  const Index a = idx(p.width());
  const Index b = idx(batch);
  const Index cols = input.cols();
  Matrix d_pre(4 * a, cols);
  Matrix hidden_prev = Matrix::Zero(a, cols);
  Matrix dh_rec = Matrix::Zero(a, b);
  Matrix dc_next = Matrix::Zero(a, b);
  for (std::size_t s = steps; s-- > 0;) {
    const std::size_t t = reverse ? steps - 1 - s : s;
    const Index col = idx(t) * b;
    const bool has_prev = s > 0;
    const Index prev_col = has_prev ? idx(reverse ? t + 1 : t - 1) * b : 0;
    const auto gates = c.gates.middleCols(col, b);
    const auto i = gates.topRows(a).array();
    const auto f = gates.middleRows(a, a).array();
    const auto gg = gates.middleRows(2 * a, a).array();
    const auto o = gates.bottomRows(a).array();
    const auto ct = c.cell_tanh.middleCols(col, b).array();

    const Matrix dh = d_hidden.middleCols(col, b) + dh_rec;
    const auto dha = dh.array();
    const Matrix dc = (dc_next.array() + dha * o * (1.0 - ct.square())).matrix();
    const auto dca = dc.array();

    auto dp = d_pre.middleCols(col, b);
    dp.topRows(a) = (dca * gg * i * (1.0 - i)).matrix();
    if (has_prev) {
      dp.middleRows(a, a) =
          (dca * c.cell.middleCols(prev_col, b).array() * f * (1.0 - f)).matrix();
      hidden_prev.middleCols(col, b) = c.hidden.middleCols(prev_col, b);
    } else {
      dp.middleRows(a, a).setZero();
    }
    dp.middleRows(2 * a, a) = (dca * i * (1.0 - gg.square())).matrix();
    dp.bottomRows(a) = (dha * ct * o * (1.0 - o)).matrix();

    dc_next = (dca * f).matrix();
    if (has_prev) dh_rec.noalias() = p.recurrent_weights.transpose() * dp;
  }
  g.input_weights.noalias() += d_pre * input.transpose();
  g.recurrent_weights.noalias() += d_pre * hidden_prev.transpose();
  g.bias += d_pre.rowwise().sum();
  return p.input_weights.transpose() * d_pre;
}

Matrix norm_forward(const BatchNormParams& p, const Matrix& x, std::size_t steps,
                    std::size_t batch, Mode mode, double epsilon, NormCache& c) {
  const Index a = x.rows();
  const Index b = idx(batch);
  c.normalized.resize(a, x.cols());
  c.inv_std.resize(a, idx(steps));
  c.batch_mean.resize(a, idx(steps));
  c.batch_var.resize(a, idx(steps));
  for (std::size_t t = 0; t < steps; ++t) {
    const auto block = x.middleCols(idx(t) * b, b);
    Vector mean, var;
    if (mode == Mode::kTrain) {
      mean = block.rowwise().mean();
      var = (block.colwise() - mean).array().square().rowwise().mean();
    } else {
      mean = p.running.mean.col(idx(t));
      var = p.running.variance.col(idx(t));
    }
    c.batch_mean.col(idx(t)) = mean;
    c.batch_var.col(idx(t)) = var;
    c.inv_std.col(idx(t)) = (var.array() + epsilon).rsqrt().matrix();
    c.normalized.middleCols(idx(t) * b, b) =
        ((block.colwise() - mean).array().colwise() * c.inv_std.col(idx(t)).array()).matrix();
  }
  return ((c.normalized.array().colwise() * p.scale.array()).colwise() + p.shift.array()).matrix();
}

Matrix norm_backward(const BatchNormParams& p, const NormCache& c, const Matrix& dy,
                     std::size_t steps, std::size_t batch, BatchNormParams& g) {
  const Index b = idx(batch);
  const double n = static_cast<double>(batch);
  g.scale += (dy.array() * c.normalized.array()).rowwise().sum().matrix();
  g.shift += dy.rowwise().sum();
  Matrix dx(dy.rows(), dy.cols());
  for (std::size_t t = 0; t < steps; ++t) {
    const Index col = idx(t) * b;
    const Matrix dxhat = (dy.middleCols(col, b).array().colwise() * p.scale.array()).matrix();
    const auto xhat = c.normalized.middleCols(col, b).array();
    const Vector sum_d = dxhat.rowwise().sum();
    const Vector sum_dx = (dxhat.array() * xhat).rowwise().sum();
    dx.middleCols(col, b) =
        (((n * dxhat.array()).colwise() - sum_d.array() - xhat.colwise() * sum_dx.array())
             .colwise() *
         (c.inv_std.col(idx(t)).array() / n))
            .matrix();
  }
  return dx;
}

/// BN → ReLU → dropout, filling the cache from `pre`.
void activate(const BatchNormParams& norm, const Matrix& pre, const ForwardTrace& trace,
              const TrainConfig& config, RngStream* rng, LayerCache& c) {
  const Matrix normalized =
      norm_forward(norm, pre, trace.shape.steps, trace.batch, trace.mode, config.norm_epsilon, c.norm);
  c.activated = normalized.cwiseMax(0.0);
  if (trace.mode == Mode::kTrain && config.dropout > 0.0) {
    const double keep = 1.0 - config.dropout;
    c.mask.resize(pre.rows(), pre.cols());
    for (Index j = 0; j < c.mask.cols(); ++j)
      for (Index r = 0; r < c.mask.rows(); ++r)
        c.mask(r, j) = rng->uniform() < config.dropout ? 0.0 : 1.0 / keep;
    c.output = c.activated.cwiseProduct(c.mask);
  } else {
    c.mask.resize(0, 0);
    c.output = c.activated;
  }
}

Matrix deactivate(const BatchNormParams& norm, const LayerCache& c, Matrix d_out,
                  const ForwardTrace& trace, BatchNormParams& g) {
  if (c.mask.size() != 0) d_out.array() *= c.mask.array();
  d_out.array() *= (c.activated.array() > 0.0).cast<double>();
  return norm_backward(norm, c.norm, d_out, trace.shape.steps, trace.batch, g);
}

void attention_block(const AttentionParams& p, const NetworkShape& shape, std::size_t batch,
                     AttentionCache& c) {
  const Index a = idx(shape.width);
  const Index b = idx(batch);
  const std::size_t span = shape.span();
  Matrix projected = p.query_weights * c.query;
  projected.colwise() += p.bias;
  c.keys = p.key_weights * c.values;
  c.activations.assign(shape.steps * span, Matrix());
  c.weights = Matrix::Zero(idx(span), c.values.cols());
  c.scores = Matrix::Zero(idx(span), c.values.cols());
  c.output = Matrix::Zero(a, c.values.cols());
  for (std::size_t t = 0; t < shape.steps; ++t) {
    const std::size_t n = std::min(span, t + 1);
    const Index col = idx(t) * b;
    for (std::size_t k = 0; k < n; ++k) {
      Matrix e = (projected.middleCols(col, b) + c.keys.middleCols(idx(t - k) * b, b))
                     .array()
                     .tanh()
                     .matrix();
      c.scores.block(idx(k), col, 1, b) = p.relevance.transpose() * e;
      c.activations[t * span + k] = std::move(e);
    }
    auto s = c.scores.block(0, col, idx(n), b);
    auto w = c.weights.block(0, col, idx(n), b);
    const Eigen::RowVectorXd top = s.colwise().maxCoeff();
    w = (s.rowwise() - top).array().exp().matrix();
    const Eigen::RowVectorXd total = w.colwise().sum();
    w.array().rowwise() /= total.array();
    for (std::size_t k = 0; k < n; ++k)
      c.output.middleCols(col, b).array() +=
          c.values.middleCols(idx(t - k) * b, b).array().rowwise() * w.row(idx(k)).array();
  }
}

}  // namespace

void validate(const TrainConfig& c) {
  if (c.batch_size == 0) throw ConfigError("B must be positive");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("rho_drop must lie in [0, 1)");
  if (!(c.l2 >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  if (!(c.validation_split >= 0.0 && c.validation_split < 1.0))
    throw ConfigError("validation_split must lie in [0, 1)");
  if (!(c.learning_rate > 0.0)) throw ConfigError("psi must be positive");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0)) throw ConfigError("delta1 must lie in [0, 1)");
  if (!(c.beta2 >= 0.0 && c.beta2 < 1.0)) throw ConfigError("delta2 must lie in [0, 1)");
  if (!(c.epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
  if (!(c.clip_norm >= 0.0)) throw ConfigError("clip_norm must be non-negative");
  if (!(c.data_weight >= 0.0)) throw ConfigError("data_weight must be non-negative");
  if (!(c.positive_weight > 0.0)) throw ConfigError("positive_weight must be positive");
  if (!(c.norm_epsilon > 0.0)) throw ConfigError("norm_epsilon must be positive");
  if (!(c.norm_momentum > 0.0 && c.norm_momentum <= 1.0))
    throw ConfigError("norm_momentum must lie in (0, 1]");
}

ForwardTrace network_forward(const SequenceBatch& input, const NetworkParams& params,
                             const TrainConfig& config, Mode mode, RngStream* rng) {
  const NetworkShape& shape = params.shape;
  if (input.data.rows() != idx(shape.input_width) || input.steps != shape.steps ||
      input.data.cols() != idx(input.steps * input.batch) || input.batch == 0)
    throw InputError("network_forward: input is " + std::to_string(input.data.rows()) + "x" +
                     std::to_string(input.steps) + " steps, network expects " +
                     std::to_string(shape.input_width) + "x" + std::to_string(shape.steps));
  if (params.layers.size() != shape.hidden_layers)
    throw StateError("network_forward: layer count does not match the shape");
  if (mode == Mode::kTrain) {
    if (input.batch < 2) throw InputError("network_forward: training mode needs a batch of at least 2");
    if (config.dropout > 0.0 && rng == nullptr)
      throw InputError("network_forward: dropout needs a random stream");
  }

  ForwardTrace trace;
  trace.shape = shape;
  trace.mode = mode;
  trace.batch = input.batch;
  trace.layers.resize(shape.hidden_layers + 1);

  LayerCache& first = trace.layers[0];
  first.input = input.data;
  activate(params.input_norm, params.input_weights * input.data, trace, config, rng, first);
  check_finite(first.output, 0);

  Matrix sum = first.output;
  for (std::size_t l = 1; l <= shape.hidden_layers; ++l) {
    const BilstmLayerParams& lp = params.layers[l - 1];
    LayerCache& c = trace.layers[l];
    c.input = sum;
    lstm_forward(lp.forward, c.input, shape.steps, input.batch, false, c.forward);
    if (shape.bidirectional) {
      lstm_forward(lp.backward, c.input, shape.steps, input.batch, true, c.backward);
      c.concat.resize(2 * idx(shape.width), c.input.cols());
      c.concat << c.forward.hidden, c.backward.hidden;
    } else {
      c.concat = c.forward.hidden;
    }
    activate(lp.norm, lp.combine * c.concat, trace, config, rng, c);
    check_finite(c.output, l);
    if (l < shape.hidden_layers) sum += c.output;
  }

  const Matrix& last = trace.layers.back().output;
  if (shape.attention) {
    trace.attention.query = sum;
    trace.attention.values = last;
    attention_block(params.attention, shape, input.batch, trace.attention);
    trace.head_input = trace.attention.output + sum;
  } else {
    trace.head_input = last + sum;
  }
  trace.logits = params.head_weights * trace.head_input;
  trace.logits.colwise() += params.head_bias;
  if (shape.head == HeadMode::kSigmoid) {
    trace.probabilities = sigmoid(trace.logits);
  } else {
    const Index k = idx(shape.devices);
    trace.probabilities.resize(trace.logits.rows(), trace.logits.cols());
    for (std::size_t g = 0; g < shape.slots_per_step; ++g) {
      const auto o = trace.logits.middleRows(idx(g) * k, k);
      auto p = trace.probabilities.middleRows(idx(g) * k, k);
      const Eigen::RowVectorXd top = o.colwise().maxCoeff();
      p = (o.rowwise() - top).array().exp().matrix();
      const Eigen::RowVectorXd total = p.colwise().sum();
      p.array().rowwise() /= total.array();
    }
  }
  check_finite(trace.probabilities, shape.hidden_layers + 1);
  return trace;
}

void update_running_stats(NetworkParams& params, const ForwardTrace& trace, double momentum) {
  if (trace.mode != Mode::kTrain) return;
  auto fold = [&](BatchNormParams& norm, const NormCache& c) {
    norm.running.mean = (1.0 - momentum) * norm.running.mean + momentum * c.batch_mean;
    norm.running.variance = (1.0 - momentum) * norm.running.variance + momentum * c.batch_var;
  };
  fold(params.input_norm, trace.layers[0].norm);
  for (std::size_t l = 0; l < params.layers.size(); ++l)
    fold(params.layers[l].norm, trace.layers[l + 1].norm);
}

Matrix predict(const Matrix& input, const NetworkParams& params, const TrainConfig& config) {
  const SequenceBatch batch{input, params.shape.steps, 1};
  return network_forward(batch, params, config, Mode::kInference).probabilities;
}

double data_loss(const ForwardTrace& trace, const Matrix& labels, const TrainConfig& config) {
  if (labels.rows() != trace.logits.rows() || labels.cols() != trace.logits.cols())
    throw InputError("data_loss: label shape does not match the network output");
  double total = 0.0;
  if (trace.shape.head == HeadMode::kSigmoid) {
    for (Index j = 0; j < labels.cols(); ++j)
      for (Index r = 0; r < labels.rows(); ++r) {
        const double p = labels(r, j);
        const double o = trace.logits(r, j);
        total += config.positive_weight * p * softplus(-o) + (1.0 - p) * softplus(o);
      }
  } else {
    const Index k = idx(trace.shape.devices);
    for (Index j = 0; j < labels.cols(); ++j)
      for (std::size_t g = 0; g < trace.shape.slots_per_step; ++g) {
        const auto o = trace.logits.col(j).segment(idx(g) * k, k);
        const double top = o.maxCoeff();
        const double lse = top + std::log((o.array() - top).exp().sum());
        for (Index r = 0; r < k; ++r) total -= labels(idx(g) * k + r, j) * (o(r) - lse);
      }
  }
  return total / static_cast<double>(labels.size());
}

double objective(const ForwardTrace& trace, const Matrix& labels, const NetworkParams& params,
                 const TrainConfig& config) {
  return config.data_weight * data_loss(trace, labels, config) + config.l2 * squared_norm(params);
}

double loss(const Vector& labels, const Vector& probabilities, const NetworkParams& params,
            double l2, HeadMode head) {
  if (l2 < 0.0) throw ConfigError("lambda must be non-negative");
  if (labels.size() != probabilities.size() || labels.size() == 0)
    throw InputError("loss: label and probability vectors differ in length");
  constexpr double kFloor = 1e-12;
  double total = 0.0;
  for (Index k = 0; k < labels.size(); ++k) {
    const double q = std::clamp(probabilities(k), kFloor, 1.0 - kFloor);
    total -= labels(k) * std::log(q);
    if (head == HeadMode::kSigmoid) total -= (1.0 - labels(k)) * std::log(1.0 - q);
  }
  return total / static_cast<double>(labels.size()) + l2 * squared_norm(params);
}

NetworkParams network_backward(const ForwardTrace& trace, const Matrix& labels,
                               const NetworkParams& params, const TrainConfig& config) {
  const NetworkShape& shape = params.shape;
  if (!(trace.shape == shape) || trace.layers.size() != shape.hidden_layers + 1 ||
      params.layers.size() != shape.hidden_layers)
    throw StateError("network_backward: trace was produced by a different network");
  if (trace.mode != Mode::kTrain)
    throw StateError("network_backward: trace must come from a training-mode pass");
  if (labels.rows() != trace.logits.rows() || labels.cols() != trace.logits.cols())
    throw InputError("network_backward: label shape does not match the network output");

  NetworkParams g = NetworkParams::zeros(shape);
  const Index a = idx(shape.width);
  const Index b = idx(trace.batch);
  const double scale = config.data_weight / static_cast<double>(labels.size());

  Matrix d_logits(labels.rows(), labels.cols());
  if (shape.head == HeadMode::kSigmoid) {
    const auto p = labels.array();
    const auto q = trace.probabilities.array();
    d_logits = (config.positive_weight * p * (q - 1.0) + (1.0 - p) * q).matrix() * scale;
  } else {
    const Index k = idx(shape.devices);
    for (std::size_t grp = 0; grp < shape.slots_per_step; ++grp) {
      const auto p = labels.middleRows(idx(grp) * k, k);
      const auto q = trace.probabilities.middleRows(idx(grp) * k, k);
      const Eigen::RowVectorXd mass = p.colwise().sum();
      d_logits.middleRows(idx(grp) * k, k) =
          ((q.array().rowwise() * mass.array()) - p.array()).matrix() * scale;
    }
  }
  g.head_weights.noalias() = d_logits * trace.head_input.transpose();
  g.head_bias = d_logits.rowwise().sum();
  const Matrix d_head = params.head_weights.transpose() * d_logits;

  std::vector<Matrix> d_out(shape.hidden_layers + 1, Matrix::Zero(a, labels.cols()));
  Matrix d_query = d_head;
  if (shape.attention) {
    const AttentionCache& c = trace.attention;
    const AttentionParams& p = params.attention;
    const std::size_t span = shape.span();
    Matrix d_proj = Matrix::Zero(a, labels.cols());
    Matrix d_keys = Matrix::Zero(a, labels.cols());
    Matrix& d_values = d_out.back();
    for (std::size_t t = 0; t < shape.steps; ++t) {
      const std::size_t n = std::min(span, t + 1);
      const Index col = idx(t) * b;
      const auto dz = d_head.middleCols(col, b);
      const auto w = c.weights.block(0, col, idx(n), b);
      Matrix dw(idx(n), b);
      for (std::size_t k = 0; k < n; ++k) {
        const Index vcol = idx(t - k) * b;
        dw.row(idx(k)) = (dz.array() * c.values.middleCols(vcol, b).array()).colwise().sum();
        d_values.middleCols(vcol, b).array() += dz.array().rowwise() * w.row(idx(k)).array();
      }
      const Eigen::RowVectorXd mean = (w.array() * dw.array()).colwise().sum();
      const Matrix ds = (w.array() * (dw.array().rowwise() - mean.array())).matrix();
      for (std::size_t k = 0; k < n; ++k) {
        const Matrix& e = c.activations[t * span + k];
        g.attention.relevance.noalias() += e * ds.row(idx(k)).transpose();
        const Matrix d_pre =
            ((p.relevance * ds.row(idx(k))).array() * (1.0 - e.array().square())).matrix();
        d_proj.middleCols(col, b) += d_pre;
        d_keys.middleCols(idx(t - k) * b, b) += d_pre;
      }
    }
    g.attention.query_weights.noalias() = d_proj * c.query.transpose();
    g.attention.bias = d_proj.rowwise().sum();
    d_query.noalias() += p.query_weights.transpose() * d_proj;
    g.attention.key_weights.noalias() = d_keys * c.values.transpose();
    d_values.noalias() += p.key_weights.transpose() * d_keys;
  } else {
    d_out.back() += d_head;
  }
  for (std::size_t i = 0; i < shape.hidden_layers; ++i) d_out[i] += d_query;

  for (std::size_t l = shape.hidden_layers; l >= 1; --l) {
    const BilstmLayerParams& lp = params.layers[l - 1];
    BilstmLayerParams& lg = g.layers[l - 1];
    const LayerCache& c = trace.layers[l];
    const Matrix d_pre = deactivate(lp.norm, c, d_out[l], trace, lg.norm);
    lg.combine.noalias() += d_pre * c.concat.transpose();
    const Matrix d_concat = lp.combine.transpose() * d_pre;
    Matrix d_input = lstm_backward(lp.forward, c.input, c.forward, d_concat.topRows(a),
                                   shape.steps, trace.batch, false, lg.forward);
    if (shape.bidirectional)
      d_input += lstm_backward(lp.backward, c.input, c.backward, d_concat.bottomRows(a),
                               shape.steps, trace.batch, true, lg.backward);
    for (std::size_t i = 0; i < l; ++i) d_out[i] += d_input;
  }
  const LayerCache& first = trace.layers[0];
  const Matrix d_pre = deactivate(params.input_norm, first, d_out[0], trace, g.input_norm);
  g.input_weights.noalias() = d_pre * first.input.transpose();

  if (config.l2 > 0.0) {
    auto gt = trainable_tensors(g);
    const auto pt = trainable_tensors(params);
    for (std::size_t i = 0; i < gt.size(); ++i)
      for (std::size_t j = 0; j < gt[i].values.size(); ++j)
        gt[i].values[j] += 2.0 * config.l2 * pt[i].values[j];
  }
  return g;
}

AdamState AdamState::for_params(const NetworkParams& params, const TrainConfig& config) {
  AdamState s;
  s.first_moment = NetworkParams::zeros(params.shape);
  s.second_moment = NetworkParams::zeros(params.shape);
  s.learning_rate = config.learning_rate;
  s.beta1 = config.beta1;
  s.beta2 = config.beta2;
  s.epsilon = config.epsilon;
  s.bias_correction = config.bias_correction;
  return s;
}

void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state) {
  auto theta = trainable_tensors(params);
  const auto g = trainable_tensors(grads);
  auto m = trainable_tensors(state.first_moment);
  auto v = trainable_tensors(state.second_moment);
  if (g.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size())
    throw InputError("adam_step: tensor lists differ");
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (g[i].values.size() != theta[i].values.size() ||
        m[i].values.size() != theta[i].values.size() ||
        v[i].values.size() != theta[i].values.size())
      throw InputError("adam_step: shape mismatch in " + theta[i].name);
  ++state.step;
  double m_scale = 1.0, v_scale = 1.0;
  if (state.bias_correction) {
    m_scale = 1.0 / (1.0 - std::pow(state.beta1, static_cast<double>(state.step)));
    v_scale = 1.0 / (1.0 - std::pow(state.beta2, static_cast<double>(state.step)));
  }
  for (std::size_t i = 0; i < theta.size(); ++i)
    for (std::size_t j = 0; j < theta[i].values.size(); ++j) {
      const double gj = g[i].values[j];
      double& mj = m[i].values[j];
      double& vj = v[i].values[j];
      mj = state.beta1 * mj + (1.0 - state.beta1) * gj;
      vj = state.beta2 * vj + (1.0 - state.beta2) * gj * gj;
      theta[i].values[j] -=
          state.learning_rate * (mj * m_scale) / std::sqrt(vj * v_scale + state.epsilon);
    }
}

double clip_global_norm(NetworkParams& grads, double max_norm) {
  const double norm = std::sqrt(squared_norm(grads));
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& t : trainable_tensors(grads))
      for (double& x : t.values) x *= s;
  }
  return norm;
}

}  // namespace gfnm::nn
