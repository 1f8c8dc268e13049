#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "seqcast/date.hpp"
#include "seqcast/lstm.hpp"
#include "seqcast/preprocess.hpp"
#include "seqcast/training.hpp"

namespace seqcast {

struct MetricsReport {
    double rmse = 0.0;
    double mae = 0.0;
    double r_squared = 0.0;
    /// Fraction, not percent.
    double mape = 0.0;
    double explained_variance = 0.0;
    /// Samples left out of MAPE because |actual| < threshold.
    std::size_t mape_excluded_count = 0;
};

inline constexpr double kDefaultMapeThreshold = 1e-8;

double rmse(const PredictionSet& p);
double mae(const PredictionSet& p);

/// 1 - SS_res / SS_tot. Throws ZeroVariance when n < 2 or actuals are
/// constant.
double r_squared(const PredictionSet& p);

struct MapeResult {
    double value = 0.0;
    std::size_t excluded = 0;
};

/// Mean of |y - ŷ| / |y| over samples with |y| >= threshold. Throws
/// AllExcluded when no sample qualifies.
MapeResult mape(const PredictionSet& p, double threshold = kDefaultMapeThreshold);

/// 1 - Var(y - ŷ) / Var(y), population variances. Never below r_squared.
double explained_variance(const PredictionSet& p);

MetricsReport compute_metrics(const PredictionSet& p, double mape_threshold = kDefaultMapeThreshold);

/// Anything that maps each window of a dataset to a scaled next-step value.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual std::vector<double> predict(const WindowedDataset& windows) const = 0;
};

/// Trained stacked LSTM, run in inference mode.
class LstmForecaster final : public Forecaster {
public:
    LstmForecaster(NetworkConfig config, NetworkParams params);

    std::vector<double> predict(const WindowedDataset& windows) const override;

    const NetworkConfig& config() const noexcept { return config_; }
    const NetworkParams& params() const noexcept { return params_; }

private:
    NetworkConfig config_;
    NetworkParams params_;
};

/// Predicts the last value of each window (tomorrow = today).
class PersistenceForecaster final : public Forecaster {
public:
    std::vector<double> predict(const WindowedDataset& windows) const override;
};

struct DatedPredictions {
    PredictionSet set;
    std::vector<Date> dates;
};

/// Runs the forecaster over the windows and maps predictions and targets
/// back to price units. Throws ScalerMismatch for an unusable scaler.
DatedPredictions predict_series(const Forecaster& model, const ScalerParams& scaler,
                                const WindowedDataset& windows);

} // namespace seqcast
