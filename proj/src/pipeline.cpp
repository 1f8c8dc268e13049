#include "seqcast/pipeline.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "seqcast/chart.hpp"
#include "seqcast/checkpoint.hpp"
#include "seqcast/error.hpp"

namespace seqcast {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string number(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

IngestSummary clean_series(const RunConfig& config, const std::string& symbol) {
    const PriceSeries raw = load_source(config, symbol);
    const PriceSeries in_range = filter_dates(raw, config.start, config.end);
    DropResult dr = drop_missing(in_range);
    IngestSummary s;
    s.symbol = symbol;
    s.rows_in_range = in_range.size();
    s.rows_kept = dr.series.size();
    s.dropped = dr.dropped;
    s.clean = std::move(dr.series);
    return s;
}

json epoch_json(const EpochLog& log) {
    return {{"epoch", log.epoch}, {"loss", log.mean_loss}, {"seconds", log.seconds}};
}

} // namespace

PriceSeries load_source(const RunConfig& config, const std::string& symbol) {
    if (!config.endpoint.empty()) {
        const std::string body = fetch_remote(config.endpoint, symbol, config.start, config.end);
        try {
            return parse_csv(body, symbol);
        } catch (const Error& e) {
            throw Error(e.code(), expand_endpoint(config.endpoint, symbol, config.start, config.end) + ": " + e.what(),
                        e.detail());
        }
    }
    const fs::path path = resolve_data_file(config, symbol);
    const std::string text = read_file(path);
    try {
        return parse_csv(text, symbol);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what(), e.detail());
    }
}

IngestSummary cmd_ingest(const RunConfig& config, const std::string& symbol, std::ostream& out) {
    IngestSummary s = clean_series(config, symbol);
    const std::vector<double> values = price_values(s.clean, config.price_field);

    std::optional<MovingAverage> sma100, sma200;
    if (values.size() >= 100) sma100 = sma(values, 100);
    if (values.size() >= 200) sma200 = sma(values, 200);

    std::istringstream rows(serialize_csv(s.clean));
    std::string line;
    std::string csv;
    std::getline(rows, line);
    csv += line + ",SMA100,SMA200\n";
    for (std::size_t i = 0; std::getline(rows, line); ++i) {
        csv += line;
        csv += ',';
        if (sma100) {
            if (auto v = sma100->at(i)) csv += number(*v);
        }
        csv += ',';
        if (sma200) {
            if (auto v = sma200->at(i)) csv += number(*v);
        }
        csv += '\n';
    }
    s.output = fs::path(config.out_dir) / (symbol + "_clean.csv");
    write_file(s.output, csv);
    out << "ingest " << symbol << ": rows " << s.rows_in_range << ", kept " << s.rows_kept << ", dropped "
        << s.dropped << " -> " << s.output.string() << '\n';
    return s;
}

PreparedData prepare_data(const RunConfig& config, const PriceSeries& clean) {
    PreparedData d;
    d.clean = clean;
    d.split = chronological_split(clean, config.split_ratio);
    const auto train_values = price_values(d.split.train, config.price_field);
    const auto test_values = price_values(d.split.test, config.price_field);
    d.scaler = fit_scaler(train_values);
    const auto scaled_train = transform(d.scaler, train_values);
    const auto scaled_test = transform(d.scaler, test_values);

    std::vector<Date> train_dates, test_dates;
    for (const auto& b : d.split.train.bars) train_dates.push_back(b.date);
    for (const auto& b : d.split.test.bars) test_dates.push_back(b.date);

    d.train_windows = make_windows(scaled_train, config.window, train_dates);
    const std::span<const double> tail(scaled_train.data() + scaled_train.size() - config.window, config.window);
    d.test_windows = bridge_test_windows(tail, scaled_test, config.window, test_dates);
    return d;
}

fs::path artifact_stem(const RunConfig& config, const std::string& symbol, const std::string& hash) {
    return fs::path(config.out_dir) / (symbol + "_" + hash);
}

TrainSummary cmd_train(const RunConfig& config, const std::string& symbol, std::ostream& out) {
    config.validate();
    const IngestSummary ingested = cmd_ingest(config, symbol, out);
    const PreparedData data = prepare_data(config, ingested.clean);

    TrainSummary summary;
    summary.config_hash = config_hash(config, symbol);

    Checkpoint ck;
    ck.model = config.model;
    ck.symbol = symbol;
    ck.config_hash = summary.config_hash;
    ck.config = model_identity(config, symbol);
    ck.seed = config.seed;
    ck.window = config.window;
    ck.split_ratio = config.split_ratio;
    ck.price_field = config.price_field;
    ck.network = config.network;
    ck.scaler = data.scaler;

    if (config.model == ModelKind::Lstm) {
        auto result = train(init_params(config.network), config.network, data.train_windows, config.train,
                            [&](const EpochLog& log) { out << epoch_json(log).dump() << std::endl; });
        ck.params = std::move(result.params);
        summary.logs = std::move(result.logs);
    }

    summary.checkpoint = artifact_stem(config, symbol, summary.config_hash).string() + ".ckpt.json";
    fs::create_directories(config.out_dir);
    save_checkpoint(ck, summary.checkpoint);

    if (!config.log_out.empty()) {
        json records = json::array();
        for (const auto& log : summary.logs) records.push_back(epoch_json(log));
        write_file(config.log_out, records.dump(2) + "\n");
    }
    out << "checkpoint " << symbol << " -> " << summary.checkpoint.string() << '\n';
    return summary;
}

json metrics_json(const MetricsReport& m, const std::string& symbol, std::size_t window, const std::string& hash) {
    return {{"symbol", symbol},
            {"window", window},
            {"config_hash", hash},
            {"rmse", m.rmse},
            {"mae", m.mae},
            {"r_squared", m.r_squared},
            {"mape", m.mape},
            {"explained_variance", m.explained_variance},
            {"mape_excluded_count", m.mape_excluded_count}};
}

EvaluateSummary cmd_evaluate(const RunConfig& config, const std::string& symbol,
                             const std::optional<fs::path>& checkpoint, std::ostream& out) {
    config.validate();
    const fs::path ck_path =
        checkpoint ? *checkpoint
                   : fs::path(artifact_stem(config, symbol, config_hash(config, symbol)).string() + ".ckpt.json");
    const Checkpoint ck = load_checkpoint(ck_path);

    if (ck.symbol != symbol) {
        throw Error(Errc::ConfigMismatch, "checkpoint is for " + ck.symbol + ", not " + symbol);
    }
    if (ck.window != config.window) {
        throw Error(Errc::ConfigMismatch, "checkpoint window " + std::to_string(ck.window) + " != configured " +
                                              std::to_string(config.window));
    }
    if (ck.split_ratio != config.split_ratio || ck.price_field != config.price_field) {
        throw Error(Errc::ConfigMismatch, "checkpoint split ratio or price field differs from config");
    }

    const PreparedData data = prepare_data(config, clean_series(config, symbol).clean);
    if (!(data.scaler == ck.scaler)) {
        throw Error(Errc::ConfigMismatch, "scaler refit on the data (" + number(data.scaler.min_value) + ", " +
                                              number(data.scaler.max_value) + ") differs from checkpoint (" +
                                              number(ck.scaler.min_value) + ", " + number(ck.scaler.max_value) + ")");
    }

    const auto model = ck.forecaster();
    const DatedPredictions pred = predict_series(*model, ck.scaler, data.test_windows);

    EvaluateSummary s;
    s.metrics = compute_metrics(pred.set, config.mape_threshold);
    s.samples = pred.set.n();

    json report = metrics_json(s.metrics, symbol, ck.window, ck.config_hash);
    report["n"] = s.samples;
    report["model"] = std::string(to_string(ck.model));
    // MAPE on min-max scaled values, where near-zero targets blow it up.
    PredictionSet scaled{transform(ck.scaler, pred.set.y), transform(ck.scaler, pred.set.y_hat)};
    try {
        const auto sm = mape(scaled, config.mape_threshold);
        report["scaled_mape"] = sm.value;
        report["scaled_mape_excluded_count"] = sm.excluded;
    } catch (const Error&) {
        report["scaled_mape"] = nullptr;
        report["scaled_mape_excluded_count"] = scaled.n();
    }

    const std::string stem = artifact_stem(config, symbol, ck.config_hash).string();
    s.metrics_file = stem + "_metrics.json";
    s.predictions_file = stem + "_predictions.csv";
    s.chart_file = stem + "_chart.svg";

    write_file(s.metrics_file, report.dump(2) + "\n");

    std::string csv = "date,actual,predicted\n";
    for (std::size_t i = 0; i < pred.set.n(); ++i) {
        csv += (i < pred.dates.size() ? pred.dates[i].iso() : std::to_string(i)) + "," + number(pred.set.y[i]) +
               "," + number(pred.set.y_hat[i]) + "\n";
    }
    write_file(s.predictions_file, csv);
    write_file(s.chart_file, render_prediction_chart(symbol + " actual vs predicted", pred.dates, pred.set.y,
                                                     pred.set.y_hat));

    out << "evaluate " << symbol << ": " << report.dump() << '\n';
    return s;
}

bool SweepSummary::all_ok() const noexcept {
    return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.metrics.has_value(); });
}

SweepSummary cmd_sweep(const RunConfig& config, std::ostream& out) {
    config.validate();
    SweepSummary summary;
    for (const auto& symbol : config.symbols) {
        SweepRow row;
        row.symbol = symbol;
        try {
            const auto trained = cmd_train(config, symbol, out);
            row.metrics = cmd_evaluate(config, symbol, trained.checkpoint, out).metrics;
        } catch (const std::exception& e) {
            row.error = e.what();
            out << "sweep " << symbol << " failed: " << row.error << '\n';
        }
        summary.rows.push_back(std::move(row));
    }

    double sum = 0.0;
    std::size_t ok = 0;
    for (const auto& r : summary.rows) {
        if (r.metrics) {
            sum += r.metrics->r_squared;
            ++ok;
        }
    }
    if (ok > 0) summary.mean_r_squared = sum / static_cast<double>(ok);

    std::string csv = "symbol,status,rmse,mae,r_squared,mape,explained_variance,mape_excluded_count\n";
    json rows = json::array();
    for (const auto& r : summary.rows) {
        if (r.metrics) {
            const auto& m = *r.metrics;
            csv += r.symbol + ",ok," + number(m.rmse) + "," + number(m.mae) + "," + number(m.r_squared) + "," +
                   number(m.mape) + "," + number(m.explained_variance) + "," + std::to_string(m.mape_excluded_count) +
                   "\n";
            rows.push_back(metrics_json(m, r.symbol, config.window, config_hash(config, r.symbol)));
        } else {
            csv += r.symbol + ",failed,,,,,,\n";
            rows.push_back({{"symbol", r.symbol}, {"error", r.error}});
        }
    }
    csv += "MEAN," + std::string(ok > 0 ? "ok" : "failed") + ",,," +
           (summary.mean_r_squared ? number(*summary.mean_r_squared) : std::string()) + ",,,\n";

    summary.table_file = fs::path(config.out_dir) / "sweep_metrics.csv";
    write_file(summary.table_file, csv);
    json doc = {{"rows", rows}, {"mean_r_squared", summary.mean_r_squared ? json(*summary.mean_r_squared) : json()}};
    write_file(fs::path(config.out_dir) / "sweep_metrics.json", doc.dump(2) + "\n");

    out << csv;
    return summary;
}

double cmd_gradcheck(const RunConfig& config, const GradcheckOptions& options, std::ostream& out) {
    config.network.validate();
    const NetworkParams params = init_params(config.network);
    Rng rng = Rng::stream(config.seed, 3);
    SequenceBatch batch;
    batch.batch = options.batch;
    batch.steps = options.steps;
    batch.features = config.network.input_features;
    batch.values.resize(batch.batch * batch.steps * batch.features);
    for (auto& v : batch.values) v = rng.uniform01();
    std::vector<double> targets(options.batch);
    for (auto& t : targets) t = rng.uniform01();

    const double err =
        finite_diff_gradcheck(params, config.network, batch, targets, options.probes, options.step, config.seed);
    out << json{{"max_relative_error", err},
                {"probes", options.probes},
                {"step", options.step},
                {"parameters", params.size()}}
               .dump()
        << '\n';
    return err;
}

} // namespace seqcast
