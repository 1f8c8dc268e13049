#include "seqcast/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "seqcast/error.hpp"

#ifndef SEQCAST_DEFAULT_DATA_DIR
#define SEQCAST_DEFAULT_DATA_DIR "data/fixtures"
#endif

namespace seqcast {

using nlohmann::json;

std::string_view to_string(ModelKind kind) noexcept {
    return kind == ModelKind::Lstm ? "lstm" : "persistence";
}

ModelKind model_kind_from_string(std::string_view name) {
    if (name == "lstm") return ModelKind::Lstm;
    if (name == "persistence") return ModelKind::Persistence;
    throw Error(Errc::InvalidConfig, "unknown model '" + std::string(name) + "'");
}

void RunConfig::set_seed(std::uint64_t s) noexcept {
    seed = s;
    network.seed = s;
    train.shuffle_seed = s;
}

void RunConfig::validate() const {
    if (symbols.empty()) throw Error(Errc::InvalidConfig, "no symbols");
    for (const auto& s : symbols) {
        if (s.empty()) throw Error(Errc::InvalidConfig, "empty symbol");
    }
    if (end < start) throw Error(Errc::InvalidConfig, "end date precedes start date");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw Error(Errc::InvalidConfig, "split_ratio must lie in (0, 1)");
    if (window < 1) throw Error(Errc::InvalidConfig, "window must be >= 1");
    if (!(mape_threshold >= 0.0)) throw Error(Errc::InvalidConfig, "mape_threshold must be >= 0");
    if (network.input_features != 1) throw Error(Errc::InvalidConfig, "the pipeline feeds one price channel");
    network.validate();
    train.validate();
}

namespace {

json network_json(const NetworkConfig& n) {
    return {{"layer_units", n.layer_units}, {"dropout_rates", n.dropout_rates},
            {"input_features", n.input_features}};
}

json train_json(const TrainConfig& t) {
    return {{"epochs", t.epochs},   {"batch_size", t.batch_size}, {"learning_rate", t.learning_rate},
            {"beta1", t.beta1},     {"beta2", t.beta2},           {"epsilon", t.epsilon},
            {"clip_norm", t.clip_norm}};
}

Date date_from_json(const json& j, const char* key) {
    const auto text = j.get<std::string>();
    const auto d = Date::parse(text);
    if (!d) throw Error(Errc::InvalidConfig, std::string(key) + ": bad date '" + text + "'");
    return *d;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw Error(Errc::InvalidConfig, std::string(where) + ": unknown key '" + key + "'");
    }
}

} // namespace

json to_json(const RunConfig& c) {
    json train = train_json(c.train);
    train["threads"] = c.train.threads;
    return {{"symbols", c.symbols},
            {"data_path", c.data_path},
            {"data_dir", c.data_dir},
            {"endpoint", c.endpoint},
            {"start", c.start.iso()},
            {"end", c.end.iso()},
            {"split_ratio", c.split_ratio},
            {"window", c.window},
            {"price_field", std::string(to_string(c.price_field))},
            {"model", std::string(to_string(c.model))},
            {"network", network_json(c.network)},
            {"train", train},
            {"seed", c.seed},
            {"mape_threshold", c.mape_threshold},
            {"out_dir", c.out_dir},
            {"log_out", c.log_out}};
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw Error(Errc::InvalidConfig, "config must be a JSON object");
    reject_unknown(j,
                   {"symbols", "data_path", "data_dir", "endpoint", "start", "end", "split_ratio", "window",
                    "price_field", "model", "network", "train", "seed", "mape_threshold", "out_dir", "log_out"},
                   "config");
    RunConfig c;
    try {
        if (j.contains("symbols")) c.symbols = j["symbols"].get<std::vector<std::string>>();
        if (j.contains("data_path")) c.data_path = j["data_path"].get<std::string>();
        if (j.contains("data_dir")) c.data_dir = j["data_dir"].get<std::string>();
        if (j.contains("endpoint")) c.endpoint = j["endpoint"].get<std::string>();
        if (j.contains("start")) c.start = date_from_json(j["start"], "start");
        if (j.contains("end")) c.end = date_from_json(j["end"], "end");
        if (j.contains("split_ratio")) c.split_ratio = j["split_ratio"].get<double>();
        if (j.contains("window")) c.window = j["window"].get<std::size_t>();
        if (j.contains("price_field")) c.price_field = price_field_from_string(j["price_field"].get<std::string>());
        if (j.contains("model")) c.model = model_kind_from_string(j["model"].get<std::string>());
        if (j.contains("network")) {
            const auto& n = j["network"];
            reject_unknown(n, {"layer_units", "dropout_rates", "input_features"}, "network");
            if (n.contains("layer_units")) c.network.layer_units = n["layer_units"].get<std::vector<std::size_t>>();
            if (n.contains("dropout_rates")) c.network.dropout_rates = n["dropout_rates"].get<std::vector<double>>();
            if (n.contains("input_features")) c.network.input_features = n["input_features"].get<std::size_t>();
        }
        if (j.contains("train")) {
            const auto& t = j["train"];
            reject_unknown(t, {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon", "clip_norm", "threads"},
                           "train");
            if (t.contains("epochs")) c.train.epochs = t["epochs"].get<std::size_t>();
            if (t.contains("batch_size")) c.train.batch_size = t["batch_size"].get<std::size_t>();
            if (t.contains("learning_rate")) c.train.learning_rate = t["learning_rate"].get<double>();
            if (t.contains("beta1")) c.train.beta1 = t["beta1"].get<double>();
            if (t.contains("beta2")) c.train.beta2 = t["beta2"].get<double>();
            if (t.contains("epsilon")) c.train.epsilon = t["epsilon"].get<double>();
            if (t.contains("clip_norm")) c.train.clip_norm = t["clip_norm"].get<double>();
            if (t.contains("threads")) c.train.threads = t["threads"].get<unsigned>();
        }
        c.set_seed(j.contains("seed") ? j["seed"].get<std::uint64_t>() : c.seed);
        if (j.contains("mape_threshold")) c.mape_threshold = j["mape_threshold"].get<double>();
        if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("log_out")) c.log_out = j["log_out"].get<std::string>();
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, e.what());
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
    }
    return run_config_from_json(j);
}

void save_run_config(const RunConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::Io, "cannot write config " + path.string());
    out << to_json(config).dump(2) << '\n';
}

json model_identity(const RunConfig& c, std::string_view symbol) {
    return {{"symbol", std::string(symbol)},
            {"model", std::string(to_string(c.model))},
            {"start", c.start.iso()},
            {"end", c.end.iso()},
            {"split_ratio", c.split_ratio},
            {"window", c.window},
            {"price_field", std::string(to_string(c.price_field))},
            {"network", network_json(c.network)},
            {"train", train_json(c.train)},
            {"seed", c.seed}};
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const RunConfig& config, std::string_view symbol) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(model_identity(config, symbol).dump())));
    return buf;
}

std::filesystem::path resolve_data_dir(const RunConfig& config) {
    if (!config.data_dir.empty()) return config.data_dir;
    if (const char* env = std::getenv("SEQCAST_DATA_DIR"); env && *env) return env;
    return SEQCAST_DEFAULT_DATA_DIR;
}

std::filesystem::path resolve_data_file(const RunConfig& config, std::string_view symbol) {
    if (!config.data_path.empty()) {
        std::string path = config.data_path;
        const std::string key = "{symbol}";
        for (auto pos = path.find(key); pos != std::string::npos; pos = path.find(key, pos + symbol.size())) {
            path.replace(pos, key.size(), symbol);
        }
        return path;
    }
    return resolve_data_dir(config) / (std::string(symbol) + ".csv");
}

} // namespace seqcast
