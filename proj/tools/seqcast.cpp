#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "seqcast/config.hpp"
#include "seqcast/error.hpp"
#include "seqcast/pipeline.hpp"

using namespace seqcast;

namespace {

struct Overrides {
    std::optional<std::string> config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> endpoint;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> window;
    std::optional<std::string> log_out;
    std::vector<std::string> symbols;
    std::optional<std::string> data;
    std::optional<std::string> data_dir;
    std::vector<std::size_t> units;
    std::vector<double> dropout;
    std::optional<std::size_t> batch_size;
    std::optional<double> lr;
    std::optional<double> ratio;
    std::optional<std::string> start;
    std::optional<std::string> end;
    bool adj_close = false;
    std::optional<unsigned> threads;
    std::optional<double> clip;
    std::optional<std::string> model;
};

Date parse_date_flag(const std::string& text, const char* flag) {
    auto d = Date::parse(text);
    if (!d) throw Error(Errc::BadDate, std::string(flag) + " expects YYYY-MM-DD, got '" + text + "'");
    return *d;
}

RunConfig effective_config(const Overrides& o) {
    RunConfig c = o.config_file ? load_run_config(*o.config_file) : RunConfig{};
    if (o.seed) c.set_seed(*o.seed);
    if (o.out_dir) c.out_dir = *o.out_dir;
    if (o.endpoint) c.endpoint = *o.endpoint;
    if (o.epochs) c.train.epochs = *o.epochs;
    if (o.window) c.window = *o.window;
    if (o.log_out) c.log_out = *o.log_out;
    if (!o.symbols.empty()) c.symbols = o.symbols;
    if (o.data) c.data_path = *o.data;
    if (o.data_dir) c.data_dir = *o.data_dir;
    if (!o.units.empty()) {
        c.network.layer_units = o.units;
        if (o.dropout.empty()) {
            const std::vector<double> defaults = NetworkConfig{}.dropout_rates;
            c.network.dropout_rates.assign(o.units.size(), 0.5);
            for (std::size_t i = 0; i < o.units.size() && i < defaults.size(); ++i) {
                c.network.dropout_rates[i] = defaults[i];
            }
        }
    }
    if (!o.dropout.empty()) c.network.dropout_rates = o.dropout;
    if (o.batch_size) c.train.batch_size = *o.batch_size;
    if (o.lr) c.train.learning_rate = *o.lr;
    if (o.ratio) c.split_ratio = *o.ratio;
    if (o.start) c.start = parse_date_flag(*o.start, "--start");
    if (o.end) c.end = parse_date_flag(*o.end, "--end");
    if (o.adj_close) c.price_field = PriceField::AdjClose;
    if (o.threads) c.train.threads = *o.threads;
    if (o.clip) c.train.clip_norm = *o.clip;
    if (o.model) c.model = model_kind_from_string(*o.model);
    c.validate();
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequence forecasting of daily ETF prices with stacked LSTMs"};
    app.require_subcommand(1);
    app.fallthrough();

    Overrides o;
    app.add_option("--config", o.config_file, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "Master seed for init, dropout and shuffling");
    app.add_option("--out-dir", o.out_dir, "Output directory");
    app.add_option("--endpoint", o.endpoint, "HTTP(S) CSV template with {symbol}, {start}, {end}");
    app.add_option("--epochs", o.epochs, "Training epochs");
    app.add_option("--window", o.window, "Input window length");
    app.add_option("--log-out", o.log_out, "Also write the training log as a JSON array here");
    app.add_option("--symbol", o.symbols, "Ticker (repeatable)");
    app.add_option("--data", o.data, "CSV path; {symbol} is substituted");
    app.add_option("--data-dir", o.data_dir, "Directory of <SYMBOL>.csv files");
    app.add_option("--units", o.units, "LSTM layer widths")->delimiter(',');
    app.add_option("--dropout", o.dropout, "Per-layer dropout rates")->delimiter(',');
    app.add_option("--batch-size", o.batch_size, "Mini-batch size");
    app.add_option("--lr", o.lr, "Adam learning rate");
    app.add_option("--ratio", o.ratio, "Chronological train fraction");
    app.add_option("--start", o.start, "First date (YYYY-MM-DD)");
    app.add_option("--end", o.end, "Last date (YYYY-MM-DD)");
    app.add_flag("--adj-close", o.adj_close, "Model the adjusted close instead of the close");
    app.add_option("--threads", o.threads, "Worker threads for training");
    app.add_option("--clip", o.clip, "Global gradient norm clip (0 disables)");
    app.add_option("--model", o.model, "lstm or persistence");

    auto* ingest = app.add_subcommand("ingest", "Clean the source CSV and add SMA100/SMA200");
    auto* train_cmd = app.add_subcommand("train", "Train and write a checkpoint");
    auto* evaluate = app.add_subcommand("evaluate", "Predict the test split and write metrics, CSV and chart");
    std::optional<std::string> checkpoint;
    evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file (default: derived from config)");
    auto* sweep = app.add_subcommand("sweep", "Train and evaluate every configured symbol");
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
    GradcheckOptions gc;
    double tolerance = 1e-4;
    gradcheck->add_option("--probes", gc.probes, "Number of sampled parameters");
    gradcheck->add_option("--steps", gc.steps, "Sequence length");
    gradcheck->add_option("--batch", gc.batch, "Batch size");
    gradcheck->add_option("--step", gc.step, "Central-difference step");
    gradcheck->add_option("--tolerance", tolerance, "Maximum accepted relative error");
    auto* show = app.add_subcommand("config", "Print the effective configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig config = effective_config(o);
        if (show->parsed()) {
            std::cout << to_json(config).dump(2) << '\n';
            return 0;
        }
        if (ingest->parsed()) {
            for (const auto& s : config.symbols) cmd_ingest(config, s, std::cout);
            return 0;
        }
        if (train_cmd->parsed()) {
            for (const auto& s : config.symbols) cmd_train(config, s, std::cout);
            return 0;
        }
        if (evaluate->parsed()) {
            if (checkpoint && config.symbols.size() != 1) {
                throw Error(Errc::InvalidConfig, "--checkpoint needs exactly one symbol");
            }
            std::optional<std::filesystem::path> ck;
            if (checkpoint) ck = *checkpoint;
            for (const auto& s : config.symbols) cmd_evaluate(config, s, ck, std::cout);
            return 0;
        }
        if (sweep->parsed()) {
            const auto summary = cmd_sweep(config, std::cout);
            return summary.all_ok() ? 0 : 1;
        }
        if (gradcheck->parsed()) {
            const double err = cmd_gradcheck(config, gc, std::cout);
            if (!(err < tolerance)) {
                std::cerr << "gradcheck: max relative error " << err << " exceeds " << tolerance << '\n';
                return 1;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
