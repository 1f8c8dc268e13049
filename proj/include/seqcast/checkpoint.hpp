#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "seqcast/config.hpp"
#include "seqcast/evaluate.hpp"
#include "seqcast/lstm.hpp"
#include "seqcast/preprocess.hpp"

namespace seqcast {

inline constexpr const char* kCheckpointFormat = "seqcast-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// Everything needed to evaluate a trained model deterministically. The
/// on-disk layout is described in docs/checkpoint_format.md.
struct Checkpoint {
    ModelKind model = ModelKind::Lstm;
    std::string symbol;
    std::string config_hash;
    /// model_identity() of the run that produced it.
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::size_t window = 0;
    double split_ratio = 0.8;
    PriceField price_field = PriceField::Close;
    NetworkConfig network;
    ScalerParams scaler;
    /// Present for ModelKind::Lstm only.
    std::optional<NetworkParams> params;

    std::unique_ptr<Forecaster> forecaster() const;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
/// Throws BadCheckpoint on any format or shape problem.
Checkpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace seqcast
