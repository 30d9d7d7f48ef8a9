// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gfnm/numerics/rng.hpp"

namespace gfnm::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class HeadMode { kSigmoid, kSoftmax };
enum class Mode { kTrain, kInference };

const char* to_string(HeadMode mode);
HeadMode parse_head_mode(const std::string& text);

/// Static architecture. Sequences run over `steps` time steps of width
/// `input_width`; every step emits `slots_per_step` groups of `devices` outputs
/// (1 for per-slot input, J for the single-step full-frame input).
struct NetworkShape {
  std::size_t input_width = 0;
  std::size_t steps = 0;
  std::size_t width = 0;
  std::size_t hidden_layers = 0;
  std::size_t devices = 0;
  std::size_t slots_per_step = 1;
  bool bidirectional = true;
  bool attention = true;
  std::size_t attention_span = 0;  // 0: all available steps
  HeadMode head = HeadMode::kSigmoid;

  std::size_t outputs() const noexcept { return devices * slots_per_step; }
  std::size_t directions() const noexcept { return bidirectional ? 2 : 1; }
  std::size_t span() const noexcept {
    return attention_span == 0 ? steps : std::min(attention_span, steps);
  }
  bool operator==(const NetworkShape&) const = default;
};

/// Throws ConfigError naming the offending field.
void validate(const NetworkShape& shape);

/// Gates stacked row-wise in the order input, forget, cell candidate, output.
struct LstmCellParams {
  Matrix input_weights;      // 4α × d_in
  Matrix recurrent_weights;  // 4α × α
  Vector bias;               // 4α

  std::size_t width() const noexcept { return static_cast<std::size_t>(recurrent_weights.cols()); }
};

/// Per-feature, per-step running statistics (α × steps).
struct RunningStats {
  Matrix mean;
  Matrix variance;
};

struct BatchNormParams {
  Vector scale;  // β
  Vector shift;  // γ
  RunningStats running;
};

struct BilstmLayerParams {
  LstmCellParams forward;
  LstmCellParams backward;  // unused when unidirectional
  Matrix combine;           // α × (directions·α)
  BatchNormParams norm;
};

struct AttentionParams {
  Matrix query_weights;  // α × α
  Matrix key_weights;    // α × α
  Vector bias;           // α
  Vector relevance;      // α
};

/// The input projection and the hidden combine layers carry no additive bias:
/// each feeds a batch-norm whose shift absorbs it.
struct NetworkParams {
  NetworkShape shape;
  Matrix input_weights;  // α × d_in
  BatchNormParams input_norm;
  std::vector<BilstmLayerParams> layers;
  AttentionParams attention;  // empty when attention is off
  Matrix head_weights;        // K_out × α
  Vector head_bias;           // K_out

  /// Zero-valued tensors of every trainable and running-stat field.
  static NetworkParams zeros(const NetworkShape& shape);
};

struct TensorView {
  std::string name;
  std::span<double> values;
};
struct ConstTensorView {
  std::string name;
  std::span<const double> values;
};

/// Trainable tensors in a fixed registration order. Running statistics are
/// not trainable and are excluded.
std::vector<TensorView> trainable_tensors(NetworkParams& params);
std::vector<ConstTensorView> trainable_tensors(const NetworkParams& params);

/// Closed form: α·d_in + 2α
///   + L·(D·(8α² + 4α) + D·α² + 2α)      (D directions; gates, combine, norm)
///   + A·(2α² + 2α)                       (A = 1 with attention)
///   + K_out·α + K_out.
std::size_t parameter_count(const NetworkShape& shape);
std::size_t registered_parameter_count(const NetworkParams& params);

/// Xavier-uniform weights per gate block, zero biases except forget-gate
/// bias 1, batch-norm scale 1, running variance 1.
NetworkParams initialize(const NetworkShape& shape, std::uint64_t seed);

double squared_norm(const NetworkParams& params);

// ---- Standalone layer operations (single sample unless noted) ----

struct LstmState {
  Vector hidden;
  Vector cell;
};

/// h = o ⊙ tanh(c), c = f ⊙ c_prev + i ⊙ g.
LstmState lstm_cell_forward(const Vector& input, const Vector& hidden_prev, const Vector& cell_prev,
                            const LstmCellParams& params);

/// Combine layer output W·[h_fwd(t) ‖ h_bwd(t)] + b per step (linear, before
/// normalization). Throws InputError on an empty sequence.
std::vector<Vector> bilstm_layer_forward(const std::vector<Vector>& sequence,
                                         const LstmCellParams& forward,
                                         const LstmCellParams& backward, const Matrix& combine,
                                         const Vector& combine_bias);

/// Hidden states of both directions for each step, without the combine layer.
struct BilstmStates {
  std::vector<Vector> forward;
  std::vector<Vector> backward;
};
BilstmStates bilstm_states(const std::vector<Vector>& sequence, const LstmCellParams& forward,
                           const LstmCellParams& backward);

/// Columns of `batch` are samples. Training mode normalizes with the batch
/// statistics (biased variance) and, when `running` is given, folds them in
/// with `momentum`; inference mode uses `running`.
Matrix batchnorm_forward(const Matrix& batch, const Vector& scale, const Vector& shift, Mode mode,
                         RunningStats* running = nullptr, std::size_t step = 0,
                         double epsilon = 1e-5, double momentum = 0.1);

struct AttentionResult {
  Vector output;
  Vector weights;  // ζ, most recent step first
  Vector scores;   // s
};

/// `history` holds the final-layer outputs oldest first; its last entry is the
/// current step. The span is min(span, history.size()) with 0 meaning all.
AttentionResult attention_forward(const std::vector<Vector>& history, const Vector& query,
                                  const AttentionParams& params, std::size_t span = 0);

// ---- Batched network ----

struct TrainConfig {
  std::size_t batch_size = 20;
  double dropout = 0.3;
  double l2 = 1e-4;
  double threshold = 0.5;
  double validation_split = 0.2;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
  bool bias_correction = false;
  double clip_norm = 5.0;  // 0 disables clipping
  /// Weight of the cross-entropy term; 0 leaves only the L2 penalty.
  double data_weight = 1.0;
  /// Sigmoid head only: weight on the active-device term of the BCE.
  double positive_weight = 1.0;
  double norm_epsilon = 1e-5;
  double norm_momentum = 0.1;
  std::uint64_t seed = 1;
};

/// Throws ConfigError naming the offending field.
void validate(const TrainConfig& config);

/// Column-major sequence batch: step t of sample b is column t·batch + b.
struct SequenceBatch {
  Matrix data;
  std::size_t steps = 0;
  std::size_t batch = 0;

  auto step(std::size_t t) { return data.middleCols(static_cast<Eigen::Index>(t * batch), static_cast<Eigen::Index>(batch)); }
  auto step(std::size_t t) const { return data.middleCols(static_cast<Eigen::Index>(t * batch), static_cast<Eigen::Index>(batch)); }
};

struct LstmCache {
  Matrix gates;      // 4α × TB, post-activation
  Matrix cell;       // α × TB
  Matrix cell_tanh;  // α × TB
  Matrix hidden;     // α × TB
};

struct NormCache {
  Matrix normalized;  // x̂, α × TB
  Matrix inv_std;     // α × T
  Matrix batch_mean;  // α × T
  Matrix batch_var;   // α × T
};

struct LayerCache {
  Matrix input;  // d_in × TB for the input layer, α × TB for hidden layers
  LstmCache forward;
  LstmCache backward;
  Matrix concat;  // D·α × TB
  NormCache norm;
  Matrix activated;  // post-ReLU
  Matrix mask;       // inverted-dropout multipliers; empty without dropout
  Matrix output;     // post-dropout
};

struct AttentionCache {
  Matrix query;   // α × TB
  Matrix keys;    // Z_a·V, α × TB
  Matrix values;  // V, α × TB
  std::vector<Matrix> activations;  // tanh terms, index t·span + k, α × B
  Matrix weights;                   // ζ, span × TB (zero beyond the available span)
  Matrix scores;                    // s, span × TB
  Matrix output;                    // α × TB
};

struct ForwardTrace {
  NetworkShape shape;
  Mode mode = Mode::kInference;
  std::size_t batch = 0;
  std::vector<LayerCache> layers;  // 0 is the input layer
  AttentionCache attention;
  Matrix head_input;  // α × TB
  Matrix logits;      // K_out × TB
  Matrix probabilities;
};

/// `input` has d_in rows and steps·batch columns. Training mode needs a
/// stream for the dropout masks and batch ≥ 2. NaN in any activation throws
/// NumericFault naming the layer.
ForwardTrace network_forward(const SequenceBatch& input, const NetworkParams& params,
                             const TrainConfig& config, Mode mode, RngStream* rng = nullptr);

/// Folds the trace's batch statistics into the running statistics.
void update_running_stats(NetworkParams& params, const ForwardTrace& trace, double momentum);

/// Head probabilities for one sample, K_out × steps.
Matrix predict(const Matrix& input, const NetworkParams& params, const TrainConfig& config);

/// Mean data loss over samples and output groups: the sigmoid head averages
/// the binary cross-entropy over the K entries of each group, the softmax head
/// uses −(1/K)·Σ p log p̂ per group. Labels are K_out × TB.
double data_loss(const ForwardTrace& trace, const Matrix& labels, const TrainConfig& config);
double objective(const ForwardTrace& trace, const Matrix& labels, const NetworkParams& params,
                 const TrainConfig& config);

/// Single-vector loss on probabilities (clamped to [1e-12, 1 − 1e-12]) plus
/// λ‖Θ‖². Throws ConfigError for λ < 0.
double loss(const Vector& labels, const Vector& probabilities, const NetworkParams& params,
            double l2, HeadMode head);

/// ∂objective/∂Θ for the trace's forward pass. Throws StateError when the
/// trace does not belong to `params` or was not produced in training mode.
NetworkParams network_backward(const ForwardTrace& trace, const Matrix& labels,
                               const NetworkParams& params, const TrainConfig& config);

struct AdamState {
  NetworkParams first_moment;
  NetworkParams second_moment;
  std::uint64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
  bool bias_correction = false;

  static AdamState for_params(const NetworkParams& params, const TrainConfig& config);
};

/// m ← δ1·m + (1−δ1)·g, v ← δ2·v + (1−δ2)·g², Θ ← Θ − ψ·m/√(v + ε).
void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state);

/// Rescales `grads` to global norm `max_norm` when larger. Returns the norm
/// before clipping.
double clip_global_norm(NetworkParams& grads, double max_norm);

}  // namespace gfnm::nn
