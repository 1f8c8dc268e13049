#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "seqcast/lstm.hpp"
#include "seqcast/preprocess.hpp"

namespace seqcast {

/// Paired actual / predicted values.
struct PredictionSet {
    std::vector<double> y;
    std::vector<double> y_hat;

    std::size_t n() const noexcept { return y.size(); }
};

/// (1/n) Σ (y_i - ŷ_i)². Throws EmptySet (n = 0) or ShapeMismatch.
double mse_loss(const PredictionSet& p);

/// ∂MSE/∂ŷ_i = (2/n)(ŷ_i - y_i).
std::vector<double> mse_grad(const PredictionSet& p);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct AdamState {
    NetworkParams m;
    NetworkParams v;
    std::int64_t t = 0;
    AdamConfig hp;

    /// Zero moments shaped like params.
    static AdamState fresh(const NetworkParams& params, AdamConfig hp = {});
};

/// One Adam update over flat spans; `step` is the post-increment counter.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::int64_t step, const AdamConfig& hp);

/// t += 1; m = β1 m + (1-β1) g; v = β2 v + (1-β2) g²;
/// θ -= lr · m̂ / (sqrt(v̂) + ε) with m̂ = m/(1-β1^t), v̂ = v/(1-β2^t).
void adam_step(AdamState& state, NetworkParams& params, const NetworkGrads& grads);

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t shuffle_seed = 42;
    /// Global-norm gradient clipping threshold; 0 disables it.
    double clip_norm = 0.0;
    /// Worker threads for the per-block forward/backward. Results do not
    /// depend on it.
    unsigned threads = 1;

    void validate() const;
    AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochLog {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double seconds = 0.0;
    std::size_t batches = 0;
};

/// A batch is processed in consecutive blocks of this many samples. Each
/// block's gradient is computed independently (possibly on another thread)
/// and block gradients are summed in ascending block order, so the result
/// is bitwise identical for any thread count.
inline constexpr std::size_t kReductionBlock = 8;

struct BatchGradient {
    NetworkGrads grads;
    /// Mean squared error over the batch.
    double loss = 0.0;
    std::vector<double> predictions;
};

/// Gathers the listed samples of a dataset into a [B × window × 1] batch.
SequenceBatch gather_batch(const WindowedDataset& data, std::span<const std::size_t> indices);

/// Train-mode forward + backward for the batch-mean MSE. Dropout masks for
/// block k come from a generator seeded with the k-th draw of `dropout_rng`.
BatchGradient batch_gradient(const NetworkParams& params, const NetworkConfig& config,
                             const SequenceBatch& batch, std::span<const double> targets,
                             Rng& dropout_rng, unsigned threads = 1);

/// Scales grads in place so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_global_norm(NetworkGrads& grads, double max_norm);

struct TrainResult {
    NetworkParams params;
    std::vector<EpochLog> logs;
};

/// Per epoch: shuffle sample order with Rng::stream(shuffle_seed, 2), cut
/// into batches of batch_size (the short tail batch is kept), train-mode
/// forward, backward, Adam step. Dropout masks come from
/// Rng::stream(config.seed, 1). Throws EmptyDataset.
TrainResult train(NetworkParams params, const NetworkConfig& config, const WindowedDataset& dataset,
                  const TrainConfig& tc, const std::function<void(const EpochLog&)>& on_epoch = {});

/// Compares analytic gradients of the batch MSE with central differences
/// (L(θ+h) - L(θ-h)) / 2h at `probe_count` parameters chosen uniformly with
/// Rng(probe_seed). Dropout is disabled for the comparison. Returns the max
/// of |a - f| / max(|a|, |f|, 1e-8); 0 when probe_count is 0.
double finite_diff_gradcheck(const NetworkParams& params, const NetworkConfig& config,
                             const SequenceBatch& batch, std::span<const double> targets,
                             std::size_t probe_count, double step = 1e-5,
                             std::uint64_t probe_seed = 7);

} // namespace seqcast
