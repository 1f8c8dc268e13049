#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "seqcast/random.hpp"

namespace seqcast {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Stacked LSTM layout. Every layer but the last emits its full hidden
/// sequence; the last emits only its final hidden state, which feeds a
/// one-unit dense head. dropout_rates[k] applies to the output of layer k.
struct NetworkConfig {
    std::vector<std::size_t> layer_units{50, 60, 80, 120};
    std::vector<double> dropout_rates{0.2, 0.3, 0.4, 0.5};
    std::size_t input_features = 1;
    std::uint64_t seed = 42;

    /// Throws InvalidConfig.
    void validate() const;
    std::size_t layer_input_size(std::size_t layer) const noexcept {
        return layer == 0 ? input_features : layer_units[layer - 1];
    }

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

enum class Gate : std::size_t { Forget = 0, Input = 1, Candidate = 2, Output = 3 };

/// One LSTM layer. The four gate matrices are stored stacked in `weights`
/// (rows: forget, input, candidate, output; each block hidden rows) over the
/// concatenation [h_{t-1}, x_t] (columns: hidden first, then input). Row-major
/// storage keeps each gate block contiguous.
struct LstmLayerParams {
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    RowMatrix weights;
    Eigen::VectorXd bias;

    LstmLayerParams() = default;
    LstmLayerParams(std::size_t input, std::size_t hidden);

    auto gate_weights(Gate g) { return weights.middleRows(index(g) * hidden_size, hidden_size); }
    auto gate_weights(Gate g) const { return weights.middleRows(index(g) * hidden_size, hidden_size); }
    auto gate_bias(Gate g) { return bias.segment(index(g) * hidden_size, hidden_size); }
    auto gate_bias(Gate g) const { return bias.segment(index(g) * hidden_size, hidden_size); }
    /// Columns acting on h_{t-1} and on x_t respectively.
    auto recurrent_weights() const { return weights.leftCols(hidden_size); }
    auto input_weights() const { return weights.rightCols(input_size); }

private:
    static constexpr std::size_t index(Gate g) noexcept { return static_cast<std::size_t>(g); }
};

struct DenseParams {
    Eigen::VectorXd w;
    double b = 0.0;
};

/// All trainable parameters. The gradient container has the same type.
struct NetworkParams {
    std::vector<LstmLayerParams> layers;
    DenseParams head;

    static NetworkParams zeros(const NetworkConfig& config);

    std::size_t size() const noexcept;

    /// Contiguous parameter blocks in declared order: for each layer W_f, W_i,
    /// W_c, W_o, b_f, b_i, b_c, b_o; then the dense weights and bias.
    std::vector<std::span<double>> blocks();
    std::vector<std::span<const double>> blocks() const;
    /// Names parallel to blocks(), e.g. "lstm0.W_f", "dense.b".
    std::vector<std::string> block_names() const;
    /// Shapes parallel to blocks(): {rows, cols}.
    std::vector<std::pair<std::size_t, std::size_t>> block_shapes() const;

    bool same_shape(const NetworkParams& other) const noexcept;
    void set_zero();
    NetworkParams& operator+=(const NetworkParams& other);

    /// Exact elementwise equality.
    friend bool operator==(const NetworkParams& a, const NetworkParams& b);
};

using NetworkGrads = NetworkParams;

/// 4 (in + hidden + 1) hidden per layer plus last_hidden + 1 for the head.
std::size_t parameter_count(const NetworkConfig& config);

/// Uniform Glorot weights, limit sqrt(6 / (fan_in + fan_out)) with
/// fan_in = input + hidden and fan_out = hidden for each gate block; zero
/// biases except the forget bias, which is 1. Draws come from
/// Rng::stream(seed, 0) in blocks() order, row-major within a block.
NetworkParams init_params(const NetworkConfig& config);

double sigmoid(double x) noexcept;

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;

    static LstmState zeros(std::size_t hidden);
};

struct GateRecord {
    Eigen::VectorXd forget;
    Eigen::VectorXd input;
    Eigen::VectorXd candidate;
    Eigen::VectorXd output;
};

struct CellStep {
    LstmState state;
    GateRecord gates;
};

/// Single-sample cell update:
///   f = σ(W_f [h, x] + b_f), i = σ(W_i [h, x] + b_i), o = σ(W_o [h, x] + b_o)
///   c̃ = tanh(W_c [h, x] + b_c), c' = f ⊙ c + i ⊙ c̃, h' = o ⊙ tanh(c').
CellStep lstm_cell_forward(const LstmLayerParams& params, const Eigen::VectorXd& x,
                           const LstmState& prev);

struct LayerForward {
    /// [hidden × T] when return_sequences, otherwise [hidden × 1].
    Eigen::MatrixXd outputs;
    std::vector<CellStep> steps;
};

/// Runs lstm_cell_forward over the columns of `sequence` ([input × T]).
LayerForward lstm_layer_forward(const LstmLayerParams& params, const Eigen::MatrixXd& sequence,
                                const LstmState& initial, bool return_sequences);

enum class Mode { Train, Inference };

/// Fills mask with 0 (probability rate) or 1 / (1 - rate), one uniform draw
/// per element in order. rate 0 gives all ones and consumes no draws.
void fill_dropout_mask(std::span<double> mask, double rate, Rng& rng);

struct DropoutResult {
    std::vector<double> values;
    std::vector<double> mask;
};

/// Inverted dropout. Inference mode is the identity with an all-ones mask.
/// Throws BadRate unless 0 <= rate < 1.
DropoutResult dropout_apply(std::span<const double> values, double rate, Mode mode, Rng& rng);

/// Input batch of shape [batch × steps × features], sample-major.
struct SequenceBatch {
    std::size_t batch = 0;
    std::size_t steps = 0;
    std::size_t features = 1;
    std::vector<double> values;

    double at(std::size_t b, std::size_t t, std::size_t f = 0) const noexcept {
        return values[(b * steps + t) * features + f];
    }
};

/// Intermediates of one layer over a batch. Column t * batch + b holds
/// timestep t of sample b.
struct LayerCache {
    Eigen::MatrixXd input;     // [in × T·B], already dropout-masked
    Eigen::MatrixXd gates;     // [4h × T·B] activated f, i, c̃, o
    Eigen::MatrixXd cell;      // [h × T·B]
    Eigen::MatrixXd cell_tanh; // [h × T·B]
    Eigen::MatrixXd hidden;    // [h × T·B]
    Eigen::MatrixXd mask;      // dropout on this layer's output; empty if none
};

struct ForwardCache {
    Mode mode = Mode::Inference;
    std::size_t batch = 0;
    std::size_t steps = 0;
    std::vector<LayerCache> layers;
    Eigen::MatrixXd head_input; // [last hidden × B], after dropout
};

struct ForwardResult {
    Eigen::VectorXd predictions; // [B]
    ForwardCache cache;
};

/// Batched forward pass. Train mode draws dropout masks from `dropout_rng`
/// layer by layer (required when any rate > 0); inference mode is
/// deterministic and ignores it.
ForwardResult network_forward(const NetworkParams& params, const NetworkConfig& config,
                              const SequenceBatch& batch, Mode mode, Rng* dropout_rng = nullptr);

/// Backpropagation through time. Returns Σ_b d_predictions[b] · ∂ŷ_b/∂θ;
/// with d_predictions from mse_grad this is the gradient of the batch-mean
/// loss. Throws StaleCache when the cache does not match params or the
/// upstream gradient, or came from an inference-mode forward.
NetworkGrads network_backward(const NetworkParams& params, const NetworkConfig& config,
                              const ForwardCache& cache, std::span<const double> d_predictions);

} // namespace seqcast
