#include "seqcast/lstm.hpp"

#include <cmath>
#include <string>

#include "seqcast/error.hpp"

namespace seqcast {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::size_t kGates = 4;

Eigen::Index idx(std::size_t v) noexcept { return static_cast<Eigen::Index>(v); }

template <typename Derived>
void sigmoid_inplace(Eigen::MatrixBase<Derived>&& m) {
    m = m.unaryExpr([](double x) { return sigmoid(x); });
}

template <typename Derived>
void tanh_inplace(Eigen::MatrixBase<Derived>&& m) {
    m = m.unaryExpr([](double x) { return std::tanh(x); });
}

} // namespace

void NetworkConfig::validate() const {
    if (layer_units.empty()) throw Error(Errc::InvalidConfig, "at least one LSTM layer required");
    if (layer_units.size() != dropout_rates.size()) {
        throw Error(Errc::InvalidConfig, "layer_units and dropout_rates differ in length");
    }
    if (input_features < 1) throw Error(Errc::InvalidConfig, "input_features must be >= 1");
    for (auto u : layer_units) {
        if (u < 1) throw Error(Errc::InvalidConfig, "layer units must be >= 1");
    }
    for (auto r : dropout_rates) {
        if (!(r >= 0.0 && r < 1.0)) throw Error(Errc::InvalidConfig, "dropout rates must lie in [0, 1)");
    }
}

LstmLayerParams::LstmLayerParams(std::size_t input, std::size_t hidden)
    : input_size(input),
      hidden_size(hidden),
      weights(RowMatrix::Zero(idx(kGates * hidden), idx(hidden + input))),
      bias(VectorXd::Zero(idx(kGates * hidden))) {}

NetworkParams NetworkParams::zeros(const NetworkConfig& config) {
    config.validate();
    NetworkParams p;
    for (std::size_t l = 0; l < config.layer_units.size(); ++l) {
        p.layers.emplace_back(config.layer_input_size(l), config.layer_units[l]);
    }
    p.head.w = VectorXd::Zero(idx(config.layer_units.back()));
    p.head.b = 0.0;
    return p;
}

std::size_t NetworkParams::size() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n + static_cast<std::size_t>(head.w.size()) + 1;
}

std::vector<std::span<double>> NetworkParams::blocks() {
    std::vector<std::span<double>> out;
    for (auto& l : layers) {
        const std::size_t h = l.hidden_size;
        const std::size_t cols = h + l.input_size;
        for (std::size_t g = 0; g < kGates; ++g) out.emplace_back(l.weights.data() + g * h * cols, h * cols);
        for (std::size_t g = 0; g < kGates; ++g) out.emplace_back(l.bias.data() + g * h, h);
    }
    out.emplace_back(head.w.data(), static_cast<std::size_t>(head.w.size()));
    out.emplace_back(&head.b, 1);
    return out;
}

std::vector<std::span<const double>> NetworkParams::blocks() const {
    auto mutable_blocks = const_cast<NetworkParams*>(this)->blocks();
    return {mutable_blocks.begin(), mutable_blocks.end()};
}

std::vector<std::string> NetworkParams::block_names() const {
    static constexpr const char* kW[] = {"W_f", "W_i", "W_c", "W_o"};
    static constexpr const char* kB[] = {"b_f", "b_i", "b_c", "b_o"};
    std::vector<std::string> names;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string prefix = "lstm" + std::to_string(l) + ".";
        for (auto* n : kW) names.push_back(prefix + n);
        for (auto* n : kB) names.push_back(prefix + n);
    }
    names.emplace_back("dense.w");
    names.emplace_back("dense.b");
    return names;
}

std::vector<std::pair<std::size_t, std::size_t>> NetworkParams::block_shapes() const {
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    for (const auto& l : layers) {
        for (std::size_t g = 0; g < kGates; ++g) shapes.emplace_back(l.hidden_size, l.hidden_size + l.input_size);
        for (std::size_t g = 0; g < kGates; ++g) shapes.emplace_back(l.hidden_size, 1);
    }
    shapes.emplace_back(static_cast<std::size_t>(head.w.size()), 1);
    shapes.emplace_back(1, 1);
    return shapes;
}

bool NetworkParams::same_shape(const NetworkParams& other) const noexcept {
    if (layers.size() != other.layers.size() || head.w.size() != other.head.w.size()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].input_size != other.layers[l].input_size ||
            layers[l].hidden_size != other.layers[l].hidden_size) {
            return false;
        }
    }
    return true;
}

void NetworkParams::set_zero() {
    for (auto& l : layers) {
        l.weights.setZero();
        l.bias.setZero();
    }
    head.w.setZero();
    head.b = 0.0;
}

NetworkParams& NetworkParams::operator+=(const NetworkParams& other) {
    if (!same_shape(other)) throw Error(Errc::ShapeMismatch, "parameter containers differ in shape");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].weights += other.layers[l].weights;
        layers[l].bias += other.layers[l].bias;
    }
    head.w += other.head.w;
    head.b += other.head.b;
    return *this;
}

bool operator==(const NetworkParams& a, const NetworkParams& b) {
    if (!a.same_shape(b)) return false;
    const auto ba = a.blocks();
    const auto bb = b.blocks();
    for (std::size_t i = 0; i < ba.size(); ++i) {
        for (std::size_t j = 0; j < ba[i].size(); ++j) {
            if (ba[i][j] != bb[i][j]) return false;
        }
    }
    return true;
}

std::size_t parameter_count(const NetworkConfig& config) {
    config.validate();
    std::size_t n = 0;
    for (std::size_t l = 0; l < config.layer_units.size(); ++l) {
        const std::size_t h = config.layer_units[l];
        n += kGates * (config.layer_input_size(l) + h + 1) * h;
    }
    return n + config.layer_units.back() + 1;
}

NetworkParams init_params(const NetworkConfig& config) {
    NetworkParams p = NetworkParams::zeros(config);
    Rng rng = Rng::stream(config.seed, 0);
    for (auto& layer : p.layers) {
        const double fan_in = static_cast<double>(layer.input_size + layer.hidden_size);
        const double fan_out = static_cast<double>(layer.hidden_size);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
            layer.weights.data()[i] = rng.uniform(-limit, limit);
        }
        layer.gate_bias(Gate::Forget).setOnes();
    }
    const double limit = std::sqrt(6.0 / (static_cast<double>(p.head.w.size()) + 1.0));
    for (Eigen::Index i = 0; i < p.head.w.size(); ++i) p.head.w[i] = rng.uniform(-limit, limit);
    return p;
}

double sigmoid(double x) noexcept {
    if (x > 500.0) x = 500.0;
    if (x < -500.0) x = -500.0;
    return 1.0 / (1.0 + std::exp(-x));
}

LstmState LstmState::zeros(std::size_t hidden) {
    return {VectorXd::Zero(idx(hidden)), VectorXd::Zero(idx(hidden))};
}

CellStep lstm_cell_forward(const LstmLayerParams& params, const VectorXd& x, const LstmState& prev) {
    const auto h = idx(params.hidden_size);
    if (x.size() != idx(params.input_size) || prev.h.size() != h || prev.c.size() != h) {
        throw Error(Errc::ShapeMismatch, "cell input or state does not match layer shape");
    }
    VectorXd concat(h + x.size());
    concat << prev.h, x;

    auto gate = [&](Gate g) -> VectorXd {
        return params.gate_weights(g) * concat + params.gate_bias(g);
    };

    CellStep step;
    step.gates.forget = gate(Gate::Forget).unaryExpr([](double v) { return sigmoid(v); });
    step.gates.input = gate(Gate::Input).unaryExpr([](double v) { return sigmoid(v); });
    step.gates.candidate = gate(Gate::Candidate).unaryExpr([](double v) { return std::tanh(v); });
    step.gates.output = gate(Gate::Output).unaryExpr([](double v) { return sigmoid(v); });
    step.state.c = step.gates.forget.cwiseProduct(prev.c) + step.gates.input.cwiseProduct(step.gates.candidate);
    step.state.h = step.gates.output.cwiseProduct(step.state.c.unaryExpr([](double v) { return std::tanh(v); }));
    return step;
}

LayerForward lstm_layer_forward(const LstmLayerParams& params, const MatrixXd& sequence,
                                const LstmState& initial, bool return_sequences) {
    if (sequence.cols() == 0) throw Error(Errc::EmptySequence, "sequence has no timesteps");
    if (sequence.rows() != idx(params.input_size)) {
        throw Error(Errc::ShapeMismatch, "sequence feature count does not match layer input");
    }
    LayerForward out;
    out.steps.reserve(static_cast<std::size_t>(sequence.cols()));
    LstmState state = initial;
    for (Eigen::Index t = 0; t < sequence.cols(); ++t) {
        out.steps.push_back(lstm_cell_forward(params, sequence.col(t), state));
        state = out.steps.back().state;
    }
    const auto h = idx(params.hidden_size);
    if (return_sequences) {
        out.outputs.resize(h, sequence.cols());
        for (Eigen::Index t = 0; t < sequence.cols(); ++t) {
            out.outputs.col(t) = out.steps[static_cast<std::size_t>(t)].state.h;
        }
    } else {
        out.outputs = state.h;
    }
    return out;
}

void fill_dropout_mask(std::span<double> mask, double rate, Rng& rng) {
    if (rate == 0.0) {
        std::fill(mask.begin(), mask.end(), 1.0);
        return;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    for (auto& m : mask) m = rng.uniform01() < rate ? 0.0 : keep_scale;
}

DropoutResult dropout_apply(std::span<const double> values, double rate, Mode mode, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw Error(Errc::BadRate, "rate must lie in [0, 1)");
    DropoutResult out;
    out.mask.assign(values.size(), 1.0);
    if (mode == Mode::Train) fill_dropout_mask(out.mask, rate, rng);
    out.values.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = values[i] * out.mask[i];
    return out;
}

namespace {

void check_params(const NetworkParams& params, const NetworkConfig& config) {
    config.validate();
    if (params.layers.size() != config.layer_units.size()) {
        throw Error(Errc::ShapeMismatch, "parameter layer count does not match config");
    }
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        if (layer.hidden_size != config.layer_units[l] || layer.input_size != config.layer_input_size(l) ||
            layer.weights.rows() != idx(kGates * layer.hidden_size) ||
            layer.weights.cols() != idx(layer.hidden_size + layer.input_size) ||
            layer.bias.size() != idx(kGates * layer.hidden_size)) {
            throw Error(Errc::ShapeMismatch, "layer " + std::to_string(l) + " does not match config");
        }
    }
    if (params.head.w.size() != idx(config.layer_units.back())) {
        throw Error(Errc::ShapeMismatch, "dense head does not match last layer");
    }
}

// Runs one layer over the whole batch. `input` is [in × T·B].
void layer_forward_batch(const LstmLayerParams& p, LayerCache& cache, std::size_t batch,
                         std::size_t steps) {
    const auto h = idx(p.hidden_size);
    const auto B = idx(batch);
    const auto n = idx(batch * steps);

    cache.gates.noalias() = p.input_weights() * cache.input;
    cache.gates.colwise() += p.bias;
    cache.cell.resize(h, n);
    cache.cell_tanh.resize(h, n);
    cache.hidden.resize(h, n);

    const auto recurrent = p.recurrent_weights();
    MatrixXd z(4 * h, B);
    for (Eigen::Index t = 0; t < idx(steps); ++t) {
        auto gates = cache.gates.middleCols(t * B, B);
        if (t > 0) {
            z.noalias() = recurrent * cache.hidden.middleCols((t - 1) * B, B);
            gates += z;
        }
        sigmoid_inplace(gates.topRows(2 * h));
        tanh_inplace(gates.middleRows(2 * h, h));
        sigmoid_inplace(gates.bottomRows(h));

        auto c = cache.cell.middleCols(t * B, B);
        c = gates.middleRows(h, h).cwiseProduct(gates.middleRows(2 * h, h));
        if (t > 0) c += gates.topRows(h).cwiseProduct(cache.cell.middleCols((t - 1) * B, B));
        auto tc = cache.cell_tanh.middleCols(t * B, B);
        tc = c.unaryExpr([](double v) { return std::tanh(v); });
        cache.hidden.middleCols(t * B, B) = gates.bottomRows(h).cwiseProduct(tc);
    }
}

// BPTT through one layer. dH is the loss gradient w.r.t. this layer's
// hidden outputs (after undoing dropout), [h × T·B]. Accumulates into grad;
// writes the gradient w.r.t. the layer input into dX when requested.
void layer_backward_batch(const LstmLayerParams& p, const LayerCache& cache, const MatrixXd& dH,
                          std::size_t batch, std::size_t steps, LstmLayerParams& grad, MatrixXd* dX) {
    const auto h = idx(p.hidden_size);
    const auto B = idx(batch);
    const auto T = idx(steps);

    MatrixXd D(4 * h, T * B);
    MatrixXd dh_next = MatrixXd::Zero(h, B);
    MatrixXd dc_next = MatrixXd::Zero(h, B);
    MatrixXd dc(h, B);
    MatrixXd dh(h, B);
    const auto recurrent = p.recurrent_weights();

    for (Eigen::Index t = T - 1; t >= 0; --t) {
        const auto gates = cache.gates.middleCols(t * B, B).array();
        const auto f = gates.topRows(h);
        const auto i = gates.middleRows(h, h);
        const auto g = gates.middleRows(2 * h, h);
        const auto o = gates.bottomRows(h);
        const auto tc = cache.cell_tanh.middleCols(t * B, B).array();

        dh = dH.middleCols(t * B, B) + dh_next;
        dc.array() = dc_next.array() + dh.array() * o * (1.0 - tc * tc);

        auto d = D.middleCols(t * B, B).array();
        if (t > 0) {
            d.topRows(h) = dc.array() * cache.cell.middleCols((t - 1) * B, B).array() * f * (1.0 - f);
        } else {
            d.topRows(h).setZero();
        }
        d.middleRows(h, h) = dc.array() * g * i * (1.0 - i);
        d.middleRows(2 * h, h) = dc.array() * i * (1.0 - g * g);
        d.bottomRows(h) = dh.array() * tc * o * (1.0 - o);

        dc_next.array() = dc.array() * f;
        if (t > 0) dh_next.noalias() = recurrent.transpose() * D.middleCols(t * B, B);
    }

    if (T > 1) {
        grad.weights.leftCols(h).noalias() +=
            D.rightCols((T - 1) * B) * cache.hidden.leftCols((T - 1) * B).transpose();
    }
    grad.weights.rightCols(idx(p.input_size)).noalias() += D * cache.input.transpose();
    grad.bias += D.rowwise().sum();
    if (dX) dX->noalias() = p.input_weights().transpose() * D;
}

} // namespace

ForwardResult network_forward(const NetworkParams& params, const NetworkConfig& config,
                              const SequenceBatch& batch, Mode mode, Rng* dropout_rng) {
    check_params(params, config);
    if (batch.steps == 0) throw Error(Errc::EmptySequence, "batch has no timesteps");
    if (batch.batch == 0) throw Error(Errc::ShapeMismatch, "empty batch");
    if (batch.features != config.input_features ||
        batch.values.size() != batch.batch * batch.steps * batch.features) {
        throw Error(Errc::ShapeMismatch, "batch shape does not match config");
    }
    const bool any_dropout = std::any_of(config.dropout_rates.begin(), config.dropout_rates.end(),
                                         [](double r) { return r > 0.0; });
    if (mode == Mode::Train && any_dropout && dropout_rng == nullptr) {
        throw Error(Errc::InvalidConfig, "train-mode dropout needs a generator");
    }

    const std::size_t B = batch.batch;
    const std::size_t T = batch.steps;
    const std::size_t F = batch.features;

    ForwardResult result;
    ForwardCache& cache = result.cache;
    cache.mode = mode;
    cache.batch = B;
    cache.steps = T;
    cache.layers.resize(params.layers.size());

    auto& first = cache.layers.front().input;
    first.resize(idx(F), idx(T * B));
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t f = 0; f < F; ++f) first(idx(f), idx(t * B + b)) = batch.at(b, t, f);
        }
    }

    const std::size_t last = params.layers.size() - 1;
    for (std::size_t l = 0; l <= last; ++l) {
        LayerCache& lc = cache.layers[l];
        layer_forward_batch(params.layers[l], lc, B, T);

        const double rate = config.dropout_rates[l];
        const bool drop = mode == Mode::Train && rate > 0.0;
        const auto h = idx(params.layers[l].hidden_size);
        if (l < last) {
            MatrixXd& next = cache.layers[l + 1].input;
            next = lc.hidden;
            if (drop) {
                lc.mask.resize(h, idx(T * B));
                fill_dropout_mask({lc.mask.data(), static_cast<std::size_t>(lc.mask.size())}, rate, *dropout_rng);
                next.array() *= lc.mask.array();
            }
        } else {
            cache.head_input = lc.hidden.rightCols(idx(B));
            if (drop) {
                lc.mask.resize(h, idx(B));
                fill_dropout_mask({lc.mask.data(), static_cast<std::size_t>(lc.mask.size())}, rate, *dropout_rng);
                cache.head_input.array() *= lc.mask.array();
            }
        }
    }

    result.predictions = cache.head_input.transpose() * params.head.w;
    result.predictions.array() += params.head.b;
    return result;
}

NetworkGrads network_backward(const NetworkParams& params, const NetworkConfig& config,
                              const ForwardCache& cache, std::span<const double> d_predictions) {
    check_params(params, config);
    if (cache.mode != Mode::Train) throw Error(Errc::StaleCache, "cache comes from an inference-mode forward");
    if (cache.layers.size() != params.layers.size() || d_predictions.size() != cache.batch ||
        cache.head_input.cols() != idx(cache.batch) ||
        cache.head_input.rows() != idx(config.layer_units.back())) {
        throw Error(Errc::StaleCache, "cache does not match parameters or upstream gradient");
    }
    const std::size_t B = cache.batch;
    const std::size_t T = cache.steps;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& lc = cache.layers[l];
        const auto h = idx(params.layers[l].hidden_size);
        if (lc.hidden.rows() != h || lc.hidden.cols() != idx(T * B) ||
            lc.input.rows() != idx(params.layers[l].input_size)) {
            throw Error(Errc::StaleCache, "layer " + std::to_string(l) + " cache has the wrong shape");
        }
    }

    NetworkGrads grads = NetworkParams::zeros(config);
    // Owned copy: Eigen reductions over a Map peel by address, which would make
    // the summation order depend on where the caller allocated.
    const VectorXd dpred = Eigen::Map<const VectorXd>(d_predictions.data(), idx(B));

    grads.head.w.noalias() = cache.head_input * dpred;
    grads.head.b = dpred.sum();

    const std::size_t last = params.layers.size() - 1;
    MatrixXd dH = MatrixXd::Zero(idx(params.layers[last].hidden_size), idx(T * B));
    {
        auto tail = dH.rightCols(idx(B));
        tail.noalias() = params.head.w * dpred.transpose();
        const auto& mask = cache.layers[last].mask;
        if (mask.size() > 0) tail.array() *= mask.array();
    }

    MatrixXd dX;
    for (std::size_t l = last + 1; l-- > 0;) {
        const bool need_dx = l > 0;
        layer_backward_batch(params.layers[l], cache.layers[l], dH, B, T, grads.layers[l],
                             need_dx ? &dX : nullptr);
        if (need_dx) {
            const auto& mask = cache.layers[l - 1].mask;
            if (mask.size() > 0) dX.array() *= mask.array();
            dH.swap(dX);
        }
    }
    return grads;
}

} // namespace seqcast
