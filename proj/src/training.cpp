#include "seqcast/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>
#include <utility>

#include "seqcast/error.hpp"

namespace seqcast {

namespace {

void check_pairs(const PredictionSet& p) {
    if (p.y.size() != p.y_hat.size()) throw Error(Errc::ShapeMismatch, "y and y_hat differ in length");
    if (p.y.empty()) throw Error(Errc::EmptySet, "no predictions");
}

} // namespace

double mse_loss(const PredictionSet& p) {
    check_pairs(p);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.n(); ++i) {
        const double e = p.y[i] - p.y_hat[i];
        sum += e * e;
    }
    return sum / static_cast<double>(p.n());
}

std::vector<double> mse_grad(const PredictionSet& p) {
    check_pairs(p);
    const double scale = 2.0 / static_cast<double>(p.n());
    std::vector<double> g(p.n());
    for (std::size_t i = 0; i < p.n(); ++i) g[i] = scale * (p.y_hat[i] - p.y[i]);
    return g;
}

AdamState AdamState::fresh(const NetworkParams& params, AdamConfig hp) {
    AdamState s;
    s.m = params;
    s.m.set_zero();
    s.v = s.m;
    s.hp = hp;
    return s;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::int64_t step, const AdamConfig& hp) {
    if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
        throw Error(Errc::ShapeMismatch, "adam block sizes differ");
    }
    const double t = static_cast<double>(step);
    const double correction1 = 1.0 - std::pow(hp.beta1, t);
    const double correction2 = 1.0 - std::pow(hp.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double g = grads[k];
        m[k] = hp.beta1 * m[k] + (1.0 - hp.beta1) * g;
        v[k] = hp.beta2 * v[k] + (1.0 - hp.beta2) * g * g;
        const double m_hat = m[k] / correction1;
        const double v_hat = v[k] / correction2;
        params[k] -= hp.learning_rate * m_hat / (std::sqrt(v_hat) + hp.epsilon);
    }
}

void adam_step(AdamState& state, NetworkParams& params, const NetworkGrads& grads) {
    if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
        throw Error(Errc::ShapeMismatch, "adam state, params and grads differ in shape");
    }
    ++state.t;
    auto p = params.blocks();
    const auto g = grads.blocks();
    auto m = state.m.blocks();
    auto v = state.v.blocks();
    for (std::size_t b = 0; b < p.size(); ++b) adam_update(p[b], g[b], m[b], v[b], state.t, state.hp);
}

void TrainConfig::validate() const {
    if (epochs < 1) throw Error(Errc::InvalidConfig, "epochs must be >= 1");
    if (batch_size < 1) throw Error(Errc::InvalidConfig, "batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw Error(Errc::InvalidConfig, "learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw Error(Errc::InvalidConfig, "adam betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw Error(Errc::InvalidConfig, "epsilon must be positive");
    if (clip_norm < 0.0) throw Error(Errc::InvalidConfig, "clip_norm must be >= 0");
}

SequenceBatch gather_batch(const WindowedDataset& data, std::span<const std::size_t> indices) {
    SequenceBatch batch;
    batch.batch = indices.size();
    batch.steps = data.window;
    batch.features = 1;
    batch.values.reserve(indices.size() * data.window);
    for (auto i : indices) {
        if (i >= data.samples()) throw Error(Errc::ShapeMismatch, "sample index out of range");
        const auto s = data.sample_inputs(i);
        batch.values.insert(batch.values.end(), s.begin(), s.end());
    }
    return batch;
}

BatchGradient batch_gradient(const NetworkParams& params, const NetworkConfig& config,
                             const SequenceBatch& batch, std::span<const double> targets,
                             Rng& dropout_rng, unsigned threads) {
    if (targets.size() != batch.batch) throw Error(Errc::ShapeMismatch, "one target per sample required");
    if (batch.batch == 0) throw Error(Errc::EmptyDataset, "empty batch");

    const std::size_t B = batch.batch;
    const std::size_t blocks = (B + kReductionBlock - 1) / kReductionBlock;
    const std::size_t stride = batch.steps * batch.features;

    std::vector<std::uint64_t> seeds(blocks);
    for (auto& s : seeds) s = dropout_rng.next();

    std::vector<NetworkGrads> block_grads(blocks);
    std::vector<double> predictions(B);
    std::vector<std::exception_ptr> failures(blocks);

    auto run_block = [&](std::size_t k) {
        try {
            const std::size_t begin = k * kReductionBlock;
            const std::size_t count = std::min(kReductionBlock, B - begin);
            SequenceBatch sub;
            sub.batch = count;
            sub.steps = batch.steps;
            sub.features = batch.features;
            sub.values.assign(batch.values.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                              batch.values.begin() + static_cast<std::ptrdiff_t>((begin + count) * stride));
            Rng rng(seeds[k]);
            auto fwd = network_forward(params, config, sub, Mode::Train, &rng);
            std::vector<double> d_pred(count);
            for (std::size_t j = 0; j < count; ++j) {
                predictions[begin + j] = fwd.predictions[static_cast<Eigen::Index>(j)];
                d_pred[j] = 2.0 / static_cast<double>(B) * (predictions[begin + j] - targets[begin + j]);
            }
            block_grads[k] = network_backward(params, config, fwd.cache, d_pred);
        } catch (...) {
            failures[k] = std::current_exception();
        }
    };

    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), blocks);
    if (workers <= 1) {
        for (std::size_t k = 0; k < blocks; ++k) run_block(k);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t k = w; k < blocks; k += workers) run_block(k);
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    BatchGradient out;
    out.grads = std::move(block_grads[0]);
    for (std::size_t k = 1; k < blocks; ++k) out.grads += block_grads[k];
    out.loss = mse_loss({std::vector<double>(targets.begin(), targets.end()), predictions});
    out.predictions = std::move(predictions);
    return out;
}

double clip_global_norm(NetworkGrads& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& block : std::as_const(grads).blocks()) {
        for (double g : block) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        for (auto block : grads.blocks()) {
            for (double& g : block) g *= scale;
        }
    }
    return norm;
}

TrainResult train(NetworkParams params, const NetworkConfig& config, const WindowedDataset& dataset,
                  const TrainConfig& tc, const std::function<void(const EpochLog&)>& on_epoch) {
    tc.validate();
    config.validate();
    if (dataset.samples() == 0) throw Error(Errc::EmptyDataset, "no training samples");
    if (config.input_features != 1) throw Error(Errc::ShapeMismatch, "windowed datasets carry one feature");

    AdamState adam = AdamState::fresh(params, tc.adam());
    Rng shuffle_rng = Rng::stream(tc.shuffle_seed, 2);
    Rng dropout_rng = Rng::stream(config.seed, 1);

    const std::size_t n = dataset.samples();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    result.logs.reserve(tc.epochs);
    for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        shuffle_rng.shuffle(std::span<std::size_t>(order));

        double sse = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < n; begin += tc.batch_size) {
            const std::size_t count = std::min(tc.batch_size, n - begin);
            const std::span<const std::size_t> idx(order.data() + begin, count);
            const SequenceBatch batch = gather_batch(dataset, idx);
            std::vector<double> targets(count);
            for (std::size_t j = 0; j < count; ++j) targets[j] = dataset.targets[idx[j]];

            BatchGradient bg = batch_gradient(params, config, batch, targets, dropout_rng, tc.threads);
            sse += bg.loss * static_cast<double>(count);
            if (tc.clip_norm > 0.0) clip_global_norm(bg.grads, tc.clip_norm);
            adam_step(adam, params, bg.grads);
            ++batches;
        }

        EpochLog log;
        log.epoch = epoch;
        log.mean_loss = sse / static_cast<double>(n);
        log.batches = batches;
        log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        result.logs.push_back(log);
        if (on_epoch) on_epoch(log);
    }
    result.params = std::move(params);
    return result;
}

namespace {

// Plain scalar forward pass used only by the gradient check. It shares no
// code with the batched Eigen path and runs in extended precision, so the
// central difference is not swamped by float64 round-off when a gradient
// component is tiny.
template <typename S>
S reference_loss(const NetworkParams& params, const SequenceBatch& batch,
                 std::span<const double> targets) {
    auto sig = [](S x) {
        x = std::min<S>(std::max<S>(x, -500), 500);
        return S(1) / (S(1) + std::exp(-x));
    };
    S total = 0;
    for (std::size_t b = 0; b < batch.batch; ++b) {
        std::vector<std::vector<S>> seq(batch.steps, std::vector<S>(batch.features));
        for (std::size_t t = 0; t < batch.steps; ++t) {
            for (std::size_t f = 0; f < batch.features; ++f) seq[t][f] = batch.at(b, t, f);
        }
        for (const auto& layer : params.layers) {
            const std::size_t h = layer.hidden_size;
            const std::size_t in = layer.input_size;
            std::vector<S> hid(h, S(0)), cell(h, S(0)), z(4 * h);
            std::vector<std::vector<S>> out(batch.steps, std::vector<S>(h));
            for (std::size_t t = 0; t < batch.steps; ++t) {
                for (std::size_t r = 0; r < 4 * h; ++r) {
                    S acc = layer.bias[static_cast<Eigen::Index>(r)];
                    const double* row = layer.weights.data() + r * (h + in);
                    for (std::size_t j = 0; j < h; ++j) acc += S(row[j]) * hid[j];
                    for (std::size_t j = 0; j < in; ++j) acc += S(row[h + j]) * seq[t][j];
                    z[r] = acc;
                }
                for (std::size_t k = 0; k < h; ++k) {
                    const S f = sig(z[k]);
                    const S i = sig(z[h + k]);
                    const S g = std::tanh(z[2 * h + k]);
                    const S o = sig(z[3 * h + k]);
                    cell[k] = f * cell[k] + i * g;
                    hid[k] = o * std::tanh(cell[k]);
                }
                out[t] = hid;
            }
            seq = std::move(out);
        }
        S pred = params.head.b;
        const auto& last = seq.back();
        for (std::size_t k = 0; k < last.size(); ++k) pred += S(params.head.w[static_cast<Eigen::Index>(k)]) * last[k];
        const S e = pred - S(targets[b]);
        total += e * e;
    }
    return total / S(batch.batch);
}

} // namespace

double finite_diff_gradcheck(const NetworkParams& params, const NetworkConfig& config,
                             const SequenceBatch& batch, std::span<const double> targets,
                             std::size_t probe_count, double step, std::uint64_t probe_seed) {
    if (probe_count == 0) return 0.0;
    NetworkConfig plain = config;
    std::fill(plain.dropout_rates.begin(), plain.dropout_rates.end(), 0.0);

    Rng unused(0);
    const auto analytic = batch_gradient(params, plain, batch, targets, unused).grads;

    NetworkParams probe = params;
    auto probe_blocks = probe.blocks();
    const auto grad_blocks = analytic.blocks();
    const std::size_t total = params.size();
    Rng rng(probe_seed);
    double worst = 0.0;
    for (std::size_t p = 0; p < probe_count; ++p) {
        std::size_t flat = static_cast<std::size_t>(rng.below(total));
        std::size_t b = 0;
        while (flat >= probe_blocks[b].size()) flat -= probe_blocks[b++].size();

        double& theta = probe_blocks[b][flat];
        const double original = theta;
        theta = original + step;
        const long double plus = reference_loss<long double>(probe, batch, targets);
        theta = original - step;
        const long double minus = reference_loss<long double>(probe, batch, targets);
        theta = original;

        const double numeric = static_cast<double>((plus - minus) / (2.0L * static_cast<long double>(step)));
        const double exact = grad_blocks[b][flat];
        const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
    return worst;
}

} // namespace seqcast
