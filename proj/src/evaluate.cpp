#include "seqcast/evaluate.hpp"

#include <cmath>
#include <numeric>

#include "seqcast/error.hpp"

namespace seqcast {

namespace {

void check_pairs(const PredictionSet& p) {
    if (p.y.size() != p.y_hat.size()) throw Error(Errc::ShapeMismatch, "y and y_hat differ in length");
    if (p.y.empty()) throw Error(Errc::EmptySet, "no predictions");
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Population variance; returns the mean through `mu`.
double variance(const std::vector<double>& v, double* mu = nullptr) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    if (mu) *mu = m;
    return ss / static_cast<double>(v.size());
}

void require_spread(const PredictionSet& p) {
    check_pairs(p);
    if (p.n() < 2) throw Error(Errc::ZeroVariance, "need at least 2 samples");
    if (variance(p.y) == 0.0) throw Error(Errc::ZeroVariance, "actual values are constant");
}

} // namespace

double rmse(const PredictionSet& p) { return std::sqrt(mse_loss(p)); }

double mae(const PredictionSet& p) {
    check_pairs(p);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.n(); ++i) sum += std::abs(p.y[i] - p.y_hat[i]);
    return sum / static_cast<double>(p.n());
}

double r_squared(const PredictionSet& p) {
    require_spread(p);
    const double y_mean = mean(p.y);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < p.n(); ++i) {
        ss_res += (p.y[i] - p.y_hat[i]) * (p.y[i] - p.y_hat[i]);
        ss_tot += (p.y[i] - y_mean) * (p.y[i] - y_mean);
    }
    return 1.0 - ss_res / ss_tot;
}

MapeResult mape(const PredictionSet& p, double threshold) {
    check_pairs(p);
    MapeResult out;
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < p.n(); ++i) {
        if (std::abs(p.y[i]) < threshold) {
            ++out.excluded;
            continue;
        }
        sum += std::abs(p.y[i] - p.y_hat[i]) / std::abs(p.y[i]);
        ++used;
    }
    if (used == 0) throw Error(Errc::AllExcluded, "every actual is below the MAPE threshold");
    out.value = sum / static_cast<double>(used);
    return out;
}

double explained_variance(const PredictionSet& p) {
    require_spread(p);
    std::vector<double> residual(p.n());
    for (std::size_t i = 0; i < p.n(); ++i) residual[i] = p.y[i] - p.y_hat[i];
    return 1.0 - variance(residual) / variance(p.y);
}

MetricsReport compute_metrics(const PredictionSet& p, double mape_threshold) {
    MetricsReport r;
    r.rmse = rmse(p);
    r.mae = mae(p);
    r.r_squared = r_squared(p);
    const auto m = mape(p, mape_threshold);
    r.mape = m.value;
    r.mape_excluded_count = m.excluded;
    r.explained_variance = explained_variance(p);
    return r;
}

LstmForecaster::LstmForecaster(NetworkConfig config, NetworkParams params)
    : config_(std::move(config)), params_(std::move(params)) {
    config_.validate();
    if (!params_.same_shape(NetworkParams::zeros(config_))) {
        throw Error(Errc::ShapeMismatch, "parameters do not match network config");
    }
}

std::vector<double> LstmForecaster::predict(const WindowedDataset& windows) const {
    constexpr std::size_t kChunk = 32;
    std::vector<double> out;
    out.reserve(windows.samples());
    std::vector<std::size_t> idx;
    for (std::size_t begin = 0; begin < windows.samples(); begin += kChunk) {
        const std::size_t count = std::min(kChunk, windows.samples() - begin);
        idx.resize(count);
        std::iota(idx.begin(), idx.end(), begin);
        const auto fwd = network_forward(params_, config_, gather_batch(windows, idx), Mode::Inference);
        out.insert(out.end(), fwd.predictions.data(), fwd.predictions.data() + fwd.predictions.size());
    }
    return out;
}

std::vector<double> PersistenceForecaster::predict(const WindowedDataset& windows) const {
    std::vector<double> out(windows.samples());
    for (std::size_t i = 0; i < windows.samples(); ++i) out[i] = windows.input(i, windows.window - 1);
    return out;
}

DatedPredictions predict_series(const Forecaster& model, const ScalerParams& scaler,
                                const WindowedDataset& windows) {
    if (!scaler.valid()) throw Error(Errc::ScalerMismatch, "scaler range is empty or non-finite");
    const std::vector<double> scaled = model.predict(windows);
    if (scaled.size() != windows.samples()) {
        throw Error(Errc::ShapeMismatch, "forecaster returned the wrong number of predictions");
    }
    DatedPredictions out;
    out.set.y = inverse_transform(scaler, windows.targets);
    out.set.y_hat = inverse_transform(scaler, scaled);
    out.dates = windows.target_dates;
    return out;
}

} // namespace seqcast
