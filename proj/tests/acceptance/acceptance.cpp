// One PASS/FAIL line per acceptance criterion. Usage: acceptance [output dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "seqcast/evaluate.hpp"
#include "seqcast/lstm.hpp"
#include "seqcast/market_data.hpp"
#include "seqcast/pipeline.hpp"
#include "seqcast/preprocess.hpp"
#include "seqcast/training.hpp"

using namespace seqcast;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects failed checks with a short description.
class Checker {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) {
            ++failures_;
            if (first_.empty()) first_ = what;
        }
    }
    void note(const std::string& s) {
        if (!notes_.empty()) notes_ += "; ";
        notes_ += s;
    }
    Outcome outcome() const {
        Outcome o;
        o.pass = failures_ == 0;
        o.detail = notes_;
        if (!o.pass) o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(failures_) + " failed, first: " + first_;
        return o;
    }

private:
    int failures_ = 0;
    std::string first_;
    std::string notes_;
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

SequenceBatch random_batch(std::size_t B, std::size_t T, Rng& rng) {
    SequenceBatch b{B, T, 1, std::vector<double>(B * T)};
    for (auto& v : b.values) v = rng.uniform01();
    return b;
}

Outcome gradient_correctness() {
    Checker c;
    Rng rng(2024);
    double worst_small = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        NetworkConfig config;
        const std::size_t layers = 1 + rng.below(3);
        config.layer_units.clear();
        config.dropout_rates.assign(layers, 0.0);
        for (std::size_t l = 0; l < layers; ++l) config.layer_units.push_back(1 + rng.below(4));
        config.seed = rng.next();
        const auto params = init_params(config);
        const std::size_t B = 1 + rng.below(3), T = 1 + rng.below(6);
        const auto batch = random_batch(B, T, rng);
        std::vector<double> targets(B);
        for (auto& t : targets) t = rng.uniform01();
        const double err = finite_diff_gradcheck(params, config, batch, targets, params.size(), 1e-5, rng.next());
        worst_small = std::max(worst_small, err);
        c.expect(err < 1e-4, "random config " + std::to_string(trial) + " error " + fmt(err));
    }
    c.note("100 random configs max rel err " + fmt(worst_small, 3));

    const NetworkConfig full;
    const auto params = init_params(full);
    const auto batch = random_batch(2, 5, rng);
    const std::vector<double> targets{0.4, 0.7};
    const double err = finite_diff_gradcheck(params, full, batch, targets, 50, 1e-5, 11);
    c.expect(err < 1e-4, "default architecture error " + fmt(err));
    c.note("default architecture, 50 probes " + fmt(err, 3));
    return c.outcome();
}

Outcome cell_oracle() {
    Checker c;
    LstmLayerParams zero(1, 2);
    const auto a = lstm_cell_forward(zero, Eigen::VectorXd::Constant(1, 0.9), LstmState::zeros(2));
    c.expect(a.state.h.cwiseAbs().maxCoeff() <= 1e-9 && a.state.c.cwiseAbs().maxCoeff() <= 1e-9, "zero weights");
    c.expect(std::abs(a.gates.forget(0) - 0.5) <= 1e-9 && std::abs(a.gates.output(1) - 0.5) <= 1e-9, "gates 0.5");

    LstmState prev = LstmState::zeros(2);
    prev.c.setConstant(2.0);
    const auto b = lstm_cell_forward(zero, Eigen::VectorXd::Constant(1, -1.3), prev);
    const double h = b.state.h(0);
    c.expect(std::abs(b.state.c(0) - 1.0) <= 1e-9, "c = 1");
    c.expect(std::abs(h - 0.3807970780) <= 1e-9, "h = 0.5 tanh(1)");
    c.note("h = " + fmt(h, 11));
    return c.outcome();
}

Outcome metric_oracles() {
    Checker c;
    const PredictionSet p{{1, 2, 3}, {2, 2, 2}};
    c.expect(std::abs(mse_loss(p) - 2.0 / 3.0) <= 1e-12, "mse 2/3");
    c.expect(std::abs(rmse(p) - std::sqrt(2.0 / 3.0)) <= 1e-12, "rmse sqrt(2/3)");
    c.expect(std::abs(mae(p) - 2.0 / 3.0) <= 1e-12, "mae 2/3");
    c.expect(std::abs(r_squared(p)) <= 1e-12, "r2 0");
    c.expect(std::abs(explained_variance(p)) <= 1e-12, "evs 0");
    c.expect(std::abs(mape(p).value - 4.0 / 9.0) <= 1e-12, "mape 4/9");
    const auto m = mape({{100, 200}, {110, 180}});
    c.expect(std::abs(m.value - 0.1) <= 1e-12 && m.excluded == 0, "mape 0.10");
    const PredictionSet biased{{1, 2, 3, 6}, {6, 7, 8, 11}};
    c.expect(std::abs(explained_variance(biased) - 1.0) <= 1e-12, "evs under constant bias");
    // Hand-derived: residuals all -5, SS_res = 100, SS_tot = 14.
    c.expect(std::abs(r_squared(biased) - (1.0 - 100.0 / 14.0)) <= 1e-12, "r2 under constant bias");

    Rng rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.below(100);
        PredictionSet q{std::vector<double>(n), std::vector<double>(n)};
        const double bias = rng.uniform(-2, 2);
        for (std::size_t i = 0; i < n; ++i) {
            q.y[i] = rng.uniform(0.5, 200);
            q.y_hat[i] = q.y[i] + bias + rng.uniform(-10, 10);
        }
        const auto r = compute_metrics(q);
        c.expect(r.rmse >= r.mae, "rmse >= mae");
        c.expect(r.explained_variance >= r.r_squared - 1e-12, "evs >= r2");
        c.expect(r.r_squared <= 1.0, "r2 <= 1");

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(order));
        PredictionSet s{std::vector<double>(n), std::vector<double>(n)};
        for (std::size_t i = 0; i < n; ++i) {
            s.y[i] = q.y[order[i]];
            s.y_hat[i] = q.y_hat[order[i]];
        }
        const auto rs = compute_metrics(s);
        const auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); };
        c.expect(close(r.rmse, rs.rmse) && close(r.mae, rs.mae) && close(r.r_squared, rs.r_squared) &&
                     close(r.mape, rs.mape) && close(r.explained_variance, rs.explained_variance),
                 "permutation invariance");
    }
    c.note("hand values + 1000 random vectors");
    return c.outcome();
}

Outcome overfit_capacity() {
    Checker c;
    std::vector<double> series(1000);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double t = static_cast<double>(i);
        series[i] = 10.0 + 2.0 * std::sin(2.0 * std::numbers::pi * t / 40.0) + 0.003 * t;
    }
    const std::size_t cut = split_index(series.size(), 0.8);
    const std::span<const double> train_raw(series.data(), cut), test_raw(series.data() + cut, series.size() - cut);
    const auto scaler = fit_scaler(train_raw);
    const auto train_scaled = transform(scaler, train_raw);
    const auto test_scaled = transform(scaler, test_raw);
    const std::size_t window = 20;
    const auto train_windows = make_windows(train_scaled, window);
    const auto test_windows =
        bridge_test_windows(std::span<const double>(train_scaled.data() + cut - window, window), test_scaled, window);

    const NetworkConfig config{{8, 8}, {0.0, 0.0}};
    TrainConfig tc;
    tc.epochs = 30;
    const auto result = train(init_params(config), config, train_windows, tc);
    const LstmForecaster model(config, result.params);
    const auto pred = predict_series(model, scaler, test_windows);
    const double r2 = r_squared(pred.set);
    const double first = result.logs.front().mean_loss, last = result.logs.back().mean_loss;
    c.expect(r2 >= 0.90, "test R2 " + fmt(r2));
    c.expect(last <= first / 10.0, "loss ratio");
    c.note("test R2 " + fmt(r2) + ", loss " + fmt(first, 3) + " -> " + fmt(last, 3));
    return c.outcome();
}

Outcome fixture_run(const fs::path& out) {
    Checker c;
    RunConfig config;
    config.symbols = {"VNQ"};
    config.out_dir = (out / "fixture").string();
    config.train.epochs = 10;
    std::ostringstream log;
    const auto trained = cmd_train(config, "VNQ", log);
    const auto eval = cmd_evaluate(config, "VNQ", trained.checkpoint, log);
    const auto& m = eval.metrics;
    c.expect(std::isfinite(m.rmse) && std::isfinite(m.mae) && std::isfinite(m.r_squared) && std::isfinite(m.mape) &&
                 std::isfinite(m.explained_variance),
             "finite metrics");
    c.expect(m.r_squared >= 0.75, "test R2 " + fmt(m.r_squared));
    c.note("VNQ fixture test R2 " + fmt(m.r_squared) + ", rmse " + fmt(m.rmse) + ", mae " + fmt(m.mae) +
           "; reference VNQ R2 0.9423, sector mean 0.8651 (not gated)");
    return c.outcome();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism(const fs::path& out) {
    Checker c;
    RunConfig config;
    config.symbols = {"VNQ"};
    config.end = Date::from_ymd(2014, 12, 31);
    config.train.epochs = 2;
    std::ostringstream log;
    config.out_dir = (out / "det_serial").string();
    config.train.threads = 1;
    const auto a = cmd_train(config, "VNQ", log);
    config.out_dir = (out / "det_repeat").string();
    const auto b = cmd_train(config, "VNQ", log);
    config.out_dir = (out / "det_parallel").string();
    config.train.threads = 4;
    const auto p = cmd_train(config, "VNQ", log);
    const auto bytes = slurp(a.checkpoint);
    c.expect(!bytes.empty(), "checkpoint written");
    c.expect(slurp(b.checkpoint) == bytes, "repeat run differs");
    c.expect(slurp(p.checkpoint) == bytes, "parallel run differs");

    const NetworkConfig full;
    const auto params = init_params(full);
    Rng rng(5);
    const auto batch = random_batch(32, 100, rng);
    std::vector<double> targets(32);
    for (auto& t : targets) t = rng.uniform01();
    Rng d1(1), d4(1);
    const auto serial = batch_gradient(params, full, batch, targets, d1, 1);
    const auto parallel = batch_gradient(params, full, batch, targets, d4, 4);
    c.expect(serial.grads == parallel.grads && serial.loss == parallel.loss, "batch gradient serial vs parallel");
    c.note("3 checkpoints byte-identical (" + std::to_string(bytes.size()) + " bytes); full-batch gradients equal");
    return c.outcome();
}

Outcome mape_guard() {
    Checker c;
    const PredictionSet p{{0.0, 50.0, 100.0, 80.0}, {0.37, 55.0, 90.0, 80.0}};
    const auto m = mape(p);
    c.expect(std::isfinite(m.value), "finite");
    c.expect(m.excluded == 1, "excluded count");
    c.expect(m.value < 1e6, "magnitude");
    // Hand value over the three kept samples: (0.1 + 0.1 + 0) / 3.
    c.expect(std::abs(m.value - 0.2 / 3.0) <= 1e-12, "value");
    const auto report = compute_metrics(p);
    c.expect(report.mape_excluded_count == 1 && report.mape < 1e6, "report");
    c.note("mape " + fmt(m.value) + ", excluded " + std::to_string(m.excluded));
    return c.outcome();
}

Outcome parameter_count_check() {
    Checker c;
    const NetworkConfig config;
    std::size_t expected = 0, in = config.input_features;
    for (std::size_t h : config.layer_units) {
        expected += 4 * (in + h + 1) * h;
        in = h;
    }
    expected += in + 1;
    const std::size_t reported = parameter_count(config);
    const std::size_t actual = init_params(config).size();
    c.expect(expected == 178761, "formula");
    c.expect(reported == 178761, "parameter_count");
    c.expect(actual == 178761, "materialized parameters");
    c.note(std::to_string(actual) + " trainable scalars");
    return c.outcome();
}

Outcome pipeline_algebra() {
    Checker c;
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        // Scaler roundtrip.
        const std::size_t n = 2 + rng.below(300);
        std::vector<double> v(n);
        for (auto& x : v) x = rng.uniform(1.0, 500.0);
        const auto sp = fit_scaler(v);
        std::vector<double> probe(n);
        for (auto& x : probe) x = rng.uniform(sp.min_value, 10.0 * sp.max_value);
        const auto back = inverse_transform(sp, transform(sp, probe));
        for (std::size_t i = 0; i < n; ++i) c.expect(std::abs(back[i] - probe[i]) <= 1e-12 * std::abs(probe[i]), "roundtrip");

        // Windows against brute-force enumeration.
        const std::size_t window = 1 + rng.below(std::min<std::size_t>(n - 1, 40));
        const auto ds = make_windows(v, window);
        c.expect(ds.samples() == n - window, "sample count");
        for (std::size_t i = 0; i + window < n; ++i) {
            for (std::size_t j = 0; j < window; ++j) c.expect(ds.input(i, j) == v[i + j], "window input");
            c.expect(ds.targets[i] == v[i + window], "window target");
        }

        // Split reconstruction.
        PriceSeries s{"X", {}};
        for (std::size_t i = 0; i < n; ++i) {
            OhlcvBar bar;
            bar.date = Date::from_days(static_cast<int>(16000 + 2 * i));
            bar.open = bar.high = bar.low = bar.close = bar.adj_close = v[i];
            s.bars.push_back(bar);
        }
        const double ratio = rng.uniform(0.05, 0.95);
        const auto split = chronological_split(s, ratio);
        auto joined = split.train.bars;
        joined.insert(joined.end(), split.test.bars.begin(), split.test.bars.end());
        c.expect(joined == s.bars, "split reconstruction");
        c.expect(split.train.size() == static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9)),
                 "split floor rule");

        // SMA rolling identity.
        const std::size_t k = 1 + rng.below(n);
        const auto avg = sma(v, k);
        double direct = 0.0;
        for (std::size_t i = 0; i < k; ++i) direct += v[i];
        c.expect(std::abs(*avg.at(k - 1) - direct / static_cast<double>(k)) <= 1e-9, "sma first value");
        for (std::size_t t = k; t < n; ++t) {
            const double rolled = *avg.at(t - 1) + (v[t] - v[t - k]) / static_cast<double>(k);
            c.expect(std::abs(*avg.at(t) - rolled) <= 1e-9, "sma rolling identity");
        }
    }
    c.note("200 randomized fixtures");
    return c.outcome();
}

} // namespace

int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "seqcast_acceptance";
    fs::remove_all(out);
    fs::create_directories(out);

    struct Criterion {
        int id;
        const char* name;
        double budget_seconds; // 0 means no runtime gate
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "gradient correctness", 120.0, gradient_correctness},
        {2, "cell equation oracle", 0.0, cell_oracle},
        {3, "metric oracles", 0.0, metric_oracles},
        {4, "overfit capacity", 180.0, overfit_capacity},
        {5, "end-to-end fixture run", 0.0, [&] { return fixture_run(out); }},
        {6, "determinism", 0.0, [&] { return determinism(out); }},
        {7, "MAPE guard", 0.0, mape_guard},
        {8, "parameter count", 0.0, parameter_count_check},
        {9, "pipeline algebra", 0.0, pipeline_algebra},
    };

    int failed = 0;
    for (const auto& cr : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = cr.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (cr.budget_seconds > 0.0 && secs > cr.budget_seconds) {
            o.pass = false;
            o.detail += "; over the " + fmt(cr.budget_seconds) + " s budget";
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s  %d  %-24s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", cr.id, cr.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
