#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seqcast/date.hpp"
#include "seqcast/lstm.hpp"
#include "seqcast/market_data.hpp"
#include "seqcast/training.hpp"

namespace seqcast {

enum class ModelKind { Lstm, Persistence };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind model_kind_from_string(std::string_view name);

/// Everything one experiment needs. Loaded from a JSON file, then
/// overridden by command-line flags.
struct RunConfig {
    std::vector<std::string> symbols{"VNQ"};
    /// CSV path; "{symbol}" is substituted. Empty means <data dir>/<SYMBOL>.csv.
    std::string data_path;
    /// Empty means $SEQCAST_DATA_DIR, then the bundled fixtures.
    std::string data_dir;
    /// HTTP(S) template with {symbol}/{start}/{end}; takes precedence over files.
    std::string endpoint;
    Date start = Date::from_ymd(2012, 1, 1);
    Date end = Date::from_ymd(2022, 12, 21);
    double split_ratio = 0.8;
    std::size_t window = 100;
    PriceField price_field = PriceField::Close;
    ModelKind model = ModelKind::Lstm;
    NetworkConfig network;
    TrainConfig train;
    /// Master seed; mirrored into network.seed and train.shuffle_seed.
    std::uint64_t seed = 42;
    double mape_threshold = 1e-8;
    std::string out_dir = "out";
    std::string log_out;

    void set_seed(std::uint64_t s) noexcept;
    /// Throws InvalidConfig.
    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& config, const std::filesystem::path& path);

/// The subset of the configuration that determines a trained model for one
/// symbol (data window, split, architecture, optimizer, seed). Paths, thread
/// count and logging are excluded.
nlohmann::json model_identity(const RunConfig& config, std::string_view symbol);

/// 16 hex digits of FNV-1a 64 over model_identity(...).dump().
std::string config_hash(const RunConfig& config, std::string_view symbol);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Directory holding <SYMBOL>.csv files for this run.
std::filesystem::path resolve_data_dir(const RunConfig& config);

/// CSV file for one symbol (ignored when an endpoint is configured).
std::filesystem::path resolve_data_file(const RunConfig& config, std::string_view symbol);

} // namespace seqcast
