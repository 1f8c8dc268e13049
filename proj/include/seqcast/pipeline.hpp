#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "seqcast/config.hpp"
#include "seqcast/evaluate.hpp"
#include "seqcast/market_data.hpp"
#include "seqcast/preprocess.hpp"
#include "seqcast/training.hpp"

namespace seqcast {

/// Reads the raw CSV for a symbol from the configured endpoint or file.
/// Parse errors are rethrown with the source name prepended.
PriceSeries load_source(const RunConfig& config, const std::string& symbol);

struct IngestSummary {
    std::string symbol;
    std::size_t rows_in_range = 0;
    std::size_t rows_kept = 0;
    std::size_t dropped = 0;
    std::filesystem::path output;
    PriceSeries clean;
};

/// Source -> date filter -> drop_missing. Writes <out>/<SYMBOL>_clean.csv
/// with the OHLCV columns plus SMA100 and SMA200 of the selected price
/// (empty cells where undefined) and prints a one-line summary.
IngestSummary cmd_ingest(const RunConfig& config, const std::string& symbol, std::ostream& out);

/// Cleaned series split, scaled (train-only fit) and windowed.
struct PreparedData {
    PriceSeries clean;
    SplitResult split;
    ScalerParams scaler;
    WindowedDataset train_windows;
    WindowedDataset test_windows;
};

PreparedData prepare_data(const RunConfig& config, const PriceSeries& clean);

/// Output file stem <out>/<SYMBOL>_<config hash>.
std::filesystem::path artifact_stem(const RunConfig& config, const std::string& symbol,
                                    const std::string& hash);

struct TrainSummary {
    std::filesystem::path checkpoint;
    std::string config_hash;
    std::vector<EpochLog> logs;
};

/// Ingest, prepare, train (or package the persistence baseline) and write
/// the checkpoint. One JSON line per epoch goes to `out`; the same records
/// go to config.log_out as a JSON array when set.
TrainSummary cmd_train(const RunConfig& config, const std::string& symbol, std::ostream& out);

struct EvaluateSummary {
    MetricsReport metrics;
    std::size_t samples = 0;
    std::filesystem::path metrics_file;
    std::filesystem::path predictions_file;
    std::filesystem::path chart_file;
};

/// Loads the checkpoint (default: the one cmd_train would write for this
/// config), rebuilds the test windows, predicts and writes metrics JSON,
/// predictions CSV (date,actual,predicted) and an SVG chart. Throws
/// ConfigMismatch when the checkpoint disagrees with the config or data.
EvaluateSummary cmd_evaluate(const RunConfig& config, const std::string& symbol,
                             const std::optional<std::filesystem::path>& checkpoint, std::ostream& out);

struct SweepRow {
    std::string symbol;
    std::optional<MetricsReport> metrics;
    std::string error;
};

struct SweepSummary {
    std::vector<SweepRow> rows;
    /// Mean R² over symbols that completed; nullopt when none did.
    std::optional<double> mean_r_squared;
    std::filesystem::path table_file;
    bool all_ok() const noexcept;
};

/// Train + evaluate every configured symbol independently; failures are
/// recorded per row. Writes <out>/sweep_metrics.csv and .json.
SweepSummary cmd_sweep(const RunConfig& config, std::ostream& out);

struct GradcheckOptions {
    std::size_t batch = 2;
    std::size_t steps = 5;
    std::size_t probes = 50;
    double step = 1e-5;
};

/// Gradient check of the configured architecture on random inputs in
/// [0, 1) drawn from the run seed.
double cmd_gradcheck(const RunConfig& config, const GradcheckOptions& options, std::ostream& out);

/// JSON object with the six report fields, plus symbol, window and config
/// hash.
nlohmann::json metrics_json(const MetricsReport& m, const std::string& symbol, std::size_t window,
                            const std::string& hash);

} // namespace seqcast
