#include "seqcast/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "seqcast/error.hpp"

namespace seqcast {

using nlohmann::json;

std::unique_ptr<Forecaster> Checkpoint::forecaster() const {
    if (model == ModelKind::Persistence) return std::make_unique<PersistenceForecaster>();
    if (!params) throw Error(Errc::BadCheckpoint, "LSTM checkpoint without parameters");
    return std::make_unique<LstmForecaster>(network, *params);
}

std::string serialize_checkpoint(const Checkpoint& c) {
    json j;
    j["format"] = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    j["model"] = std::string(to_string(c.model));
    j["symbol"] = c.symbol;
    j["config_hash"] = c.config_hash;
    j["config"] = c.config;
    j["seed"] = c.seed;
    j["window"] = c.window;
    j["split_ratio"] = c.split_ratio;
    j["price_field"] = std::string(to_string(c.price_field));
    j["network"] = {{"layer_units", c.network.layer_units},
                    {"dropout_rates", c.network.dropout_rates},
                    {"input_features", c.network.input_features},
                    {"seed", c.network.seed}};
    j["scaler"] = {{"min", c.scaler.min_value}, {"max", c.scaler.max_value}};

    json blocks = json::array();
    if (c.params) {
        const auto names = c.params->block_names();
        const auto shapes = c.params->block_shapes();
        const auto data = c.params->blocks();
        for (std::size_t b = 0; b < data.size(); ++b) {
            blocks.push_back({{"name", names[b]},
                              {"shape", {shapes[b].first, shapes[b].second}},
                              {"values", std::vector<double>(data[b].begin(), data[b].end())}});
        }
    }
    j["parameters"] = std::move(blocks);
    return j.dump() + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
    Checkpoint c;
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != kCheckpointFormat) {
            throw Error(Errc::BadCheckpoint, "not a seqcast checkpoint");
        }
        if (j.at("version").get<int>() != kCheckpointVersion) {
            throw Error(Errc::BadCheckpoint, "unsupported checkpoint version " + j.at("version").dump());
        }
        c.model = model_kind_from_string(j.at("model").get<std::string>());
        c.symbol = j.at("symbol").get<std::string>();
        c.config_hash = j.at("config_hash").get<std::string>();
        c.config = j.at("config");
        c.seed = j.at("seed").get<std::uint64_t>();
        c.window = j.at("window").get<std::size_t>();
        c.split_ratio = j.at("split_ratio").get<double>();
        c.price_field = price_field_from_string(j.at("price_field").get<std::string>());
        const auto& n = j.at("network");
        c.network.layer_units = n.at("layer_units").get<std::vector<std::size_t>>();
        c.network.dropout_rates = n.at("dropout_rates").get<std::vector<double>>();
        c.network.input_features = n.at("input_features").get<std::size_t>();
        c.network.seed = n.at("seed").get<std::uint64_t>();
        c.scaler.min_value = j.at("scaler").at("min").get<double>();
        c.scaler.max_value = j.at("scaler").at("max").get<double>();
        if (!c.scaler.valid()) throw Error(Errc::BadCheckpoint, "invalid scaler");

        const auto& blocks = j.at("parameters");
        if (c.model == ModelKind::Lstm) {
            c.network.validate();
            NetworkParams params = NetworkParams::zeros(c.network);
            const auto names = params.block_names();
            auto data = params.blocks();
            if (blocks.size() != data.size()) {
                throw Error(Errc::BadCheckpoint, "expected " + std::to_string(data.size()) + " parameter blocks");
            }
            for (std::size_t b = 0; b < data.size(); ++b) {
                if (blocks[b].at("name").get<std::string>() != names[b]) {
                    throw Error(Errc::BadCheckpoint, "block " + std::to_string(b) + " should be " + names[b]);
                }
                const auto values = blocks[b].at("values").get<std::vector<double>>();
                if (values.size() != data[b].size()) {
                    throw Error(Errc::BadCheckpoint, names[b] + " has the wrong number of values");
                }
                std::copy(values.begin(), values.end(), data[b].begin());
            }
            c.params = std::move(params);
        } else if (!blocks.empty()) {
            throw Error(Errc::BadCheckpoint, "persistence checkpoint carries parameters");
        }
    } catch (const json::exception& e) {
        throw Error(Errc::BadCheckpoint, e.what());
    } catch (const Error& e) {
        if (e.code() == Errc::BadCheckpoint) throw;
        throw Error(Errc::BadCheckpoint, e.what());
    }
    return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << serialize_checkpoint(checkpoint);
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_checkpoint(ss.str());
}

} // namespace seqcast
