#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "seqcast/error.hpp"
#include "seqcast/training.hpp"

using namespace seqcast;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::Io;
}

WindowedDataset sine_dataset(std::size_t points, std::size_t window, double trend = 0.0) {
    std::vector<double> v(points);
    for (std::size_t i = 0; i < points; ++i) {
        v[i] = 0.5 + 0.4 * std::sin(static_cast<double>(i) * 0.15) + trend * static_cast<double>(i);
    }
    return make_windows(v, window);
}

SequenceBatch random_batch(std::size_t B, std::size_t T, Rng& rng) {
    SequenceBatch b{B, T, 1, std::vector<double>(B * T)};
    for (auto& v : b.values) v = rng.uniform01();
    return b;
}

} // namespace

TEST_CASE("mse examples") {
    CHECK(mse_loss({{1, 2, 3}, {1, 2, 3}}) == 0.0);
    CHECK(std::abs(mse_loss({{1, 2, 3}, {2, 2, 2}}) - 2.0 / 3.0) <= 1e-15);
    CHECK(mse_loss({{1}, {4}}) == 9.0);
    CHECK(code_of([] { mse_loss({{}, {}}); }) == Errc::EmptySet);
    CHECK(code_of([] { mse_loss({{1, 2}, {1}}); }) == Errc::ShapeMismatch);
}

TEST_CASE("mse_grad examples and finite differences") {
    CHECK(mse_grad({{1, 2}, {1, 2}}) == std::vector<double>{0, 0});
    CHECK(mse_grad({{1}, {4}}) == std::vector<double>{6});
    CHECK(code_of([] { mse_grad({{}, {}}); }) == Errc::EmptySet);
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        PredictionSet p{std::vector<double>(7), std::vector<double>(7)};
        for (auto& v : p.y) v = rng.uniform(-2, 2);
        for (auto& v : p.y_hat) v = rng.uniform(-2, 2);
        const auto g = mse_grad(p);
        for (std::size_t i = 0; i < 7; ++i) {
            const double h = 1e-6;
            auto up = p, down = p;
            up.y_hat[i] += h;
            down.y_hat[i] -= h;
            const double fd = (mse_loss(up) - mse_loss(down)) / (2 * h);
            CHECK(std::abs(fd - g[i]) <= 1e-8);
        }
    }
}

TEST_CASE("mse is zero only for exact matches") {
    Rng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        PredictionSet p{std::vector<double>(5), {}};
        for (auto& v : p.y) v = rng.uniform(-1, 1);
        p.y_hat = p.y;
        CHECK(mse_loss(p) == 0.0);
        p.y_hat[rng.below(5)] += 1e-3;
        CHECK(mse_loss(p) > 0.0);
    }
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
    const NetworkConfig config{{3}, {0.0}};
    auto p = init_params(config);
    const auto before = p;
    auto state = AdamState::fresh(p);
    adam_step(state, p, NetworkParams::zeros(config));
    CHECK(p == before);
    CHECK(state.t == 1);
}

TEST_CASE("adam first update is about lr times sign") {
    Rng rng(43);
    const AdamConfig hp;
    for (int trial = 0; trial < 1000; ++trial) {
        double theta = rng.uniform(-1, 1);
        const double start = theta;
        double g = rng.uniform(-10, 10);
        if (std::abs(g) < 1e-3) g = 1e-3;
        double m = 0, v = 0;
        adam_update({&theta, 1}, {&g, 1}, {&m, 1}, {&v, 1}, 1, hp);
        const double delta = theta - start;
        CHECK(std::abs(std::abs(delta) - hp.learning_rate) <= 1e-6);
        CHECK(std::abs(delta) <= hp.learning_rate * (1 + 1e-6));
        CHECK((delta < 0) == (g > 0));
        CHECK(v >= 0.0);
    }
}

TEST_CASE("adam matches a hand-run scalar recurrence for constant g = 2") {
    const NetworkConfig config{{1}, {0.0}};
    NetworkParams p = NetworkParams::zeros(config);
    auto grads = NetworkParams::zeros(config);
    for (auto block : grads.blocks()) std::fill(block.begin(), block.end(), 2.0);
    auto state = AdamState::fresh(p);

    double theta = 0.0, m = 0.0, v = 0.0;
    const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (int t = 1; t <= 3; ++t) {
        adam_step(state, p, grads);
        m = b1 * m + (1 - b1) * 2.0;
        v = b2 * v + (1 - b2) * 4.0;
        const double mh = m / (1 - std::pow(b1, t));
        const double vh = v / (1 - std::pow(b2, t));
        theta -= lr * mh / (std::sqrt(vh) + eps);
        CHECK(state.t == t);
        for (auto block : std::as_const(p).blocks()) {
            for (double x : block) CHECK(std::abs(x - theta) <= 1e-15);
        }
    }
}

TEST_CASE("adam rejects mismatched shapes") {
    const NetworkConfig a{{3}, {0.0}}, b{{4}, {0.0}};
    auto p = init_params(a);
    auto state = AdamState::fresh(p);
    CHECK(code_of([&] { adam_step(state, p, NetworkParams::zeros(b)); }) == Errc::ShapeMismatch);
}

TEST_CASE("train logs one entry per epoch with ceil(n/batch) batches") {
    const NetworkConfig config{{4}, {0.0}};
    const auto data = make_windows(std::vector<double>(85, 0.3), 5);
    REQUIRE(data.samples() == 80);
    TrainConfig tc;
    tc.epochs = 50;
    tc.batch_size = 32;
    std::size_t seen = 0;
    const auto r = train(init_params(config), config, data, tc, [&](const EpochLog&) { ++seen; });
    CHECK(r.logs.size() == 50);
    CHECK(seen == 50);
    for (std::size_t e = 0; e < 50; ++e) {
        CHECK(r.logs[e].epoch == e + 1);
        CHECK(r.logs[e].batches == 3);
        CHECK(std::isfinite(r.logs[e].mean_loss));
    }
}

TEST_CASE("train is deterministic and thread-count independent") {
    const NetworkConfig config{{6, 4}, {0.2, 0.3}};
    const auto data = sine_dataset(120, 10);
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 20;
    const auto a = train(init_params(config), config, data, tc);
    const auto b = train(init_params(config), config, data, tc);
    tc.threads = 3;
    const auto c = train(init_params(config), config, data, tc);
    CHECK(a.params == b.params);
    CHECK(a.params == c.params);
    for (std::size_t e = 0; e < 3; ++e) {
        CHECK(a.logs[e].mean_loss == b.logs[e].mean_loss);
        CHECK(a.logs[e].mean_loss == c.logs[e].mean_loss);
    }
    tc.shuffle_seed = 99;
    CHECK_FALSE(train(init_params(config), config, data, tc).params == a.params);
}

TEST_CASE("train rejects an empty dataset") {
    const NetworkConfig config{{2}, {0.0}};
    WindowedDataset empty;
    empty.window = 3;
    CHECK(code_of([&] { train(init_params(config), config, empty, TrainConfig{}); }) == Errc::EmptyDataset);
}

TEST_CASE("noiseless sine is overfit by a tiny network") {
    const NetworkConfig config{{8}, {0.0}};
    const auto data = sine_dataset(200, 10);
    TrainConfig tc;
    tc.epochs = 30;
    const auto r = train(init_params(config), config, data, tc);
    CHECK(r.logs.back().mean_loss < r.logs.front().mean_loss / 10.0);
}

TEST_CASE("gather_batch copies the listed samples") {
    const auto data = sine_dataset(30, 4);
    std::vector<std::size_t> order(data.samples());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(44);
    rng.shuffle(std::span<std::size_t>(order));
    const auto b = gather_batch(data, order);
    REQUIRE(b.batch == data.samples());
    std::vector<std::vector<double>> got, want;
    for (std::size_t s = 0; s < b.batch; ++s) {
        got.emplace_back(b.values.begin() + static_cast<long>(s * 4), b.values.begin() + static_cast<long>(s * 4 + 4));
        const auto in = data.sample_inputs(s);
        want.emplace_back(in.begin(), in.end());
        const auto src = data.sample_inputs(order[s]);
        CHECK(std::equal(src.begin(), src.end(), got.back().begin()));
    }
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
}

TEST_CASE("batch_gradient equals one full-batch backward without dropout") {
    const NetworkConfig config{{5, 3}, {0.0, 0.0}};
    const auto p = init_params(config);
    Rng rng(45);
    const auto batch = random_batch(19, 6, rng);
    std::vector<double> targets(19);
    for (auto& t : targets) t = rng.uniform01();
    Rng drop(1);
    const auto bg = batch_gradient(p, config, batch, targets, drop, 1);

    const auto fwd = network_forward(p, config, batch, Mode::Inference);
    std::vector<double> preds(fwd.predictions.data(), fwd.predictions.data() + 19);
    Rng drop2(1);
    const auto tf = network_forward(p, config, batch, Mode::Train, &drop2);
    const auto g = network_backward(p, config, tf.cache, mse_grad({targets, preds}));
    CHECK(std::abs(bg.loss - mse_loss({targets, preds})) <= 1e-15);
    const auto a = bg.grads.blocks();
    const auto b = g.blocks();
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (std::size_t i = 0; i < a[k].size(); ++i) CHECK(std::abs(a[k][i] - b[k][i]) <= 1e-12);
    }
}

TEST_CASE("batch_gradient is bitwise identical for any thread count") {
    const NetworkConfig config{{6, 5}, {0.3, 0.5}};
    const auto p = init_params(config);
    Rng rng(46);
    const auto batch = random_batch(32, 8, rng);
    std::vector<double> targets(32);
    for (auto& t : targets) t = rng.uniform01();
    Rng d1(9), d2(9), d3(9);
    const auto a = batch_gradient(p, config, batch, targets, d1, 1);
    const auto b = batch_gradient(p, config, batch, targets, d2, 2);
    const auto c = batch_gradient(p, config, batch, targets, d3, 4);
    CHECK(a.grads == b.grads);
    CHECK(a.grads == c.grads);
    CHECK(a.loss == c.loss);
    CHECK(d1.next() == d3.next());
}

TEST_CASE("clip_global_norm") {
    const NetworkConfig config{{2}, {0.0}};
    auto g = NetworkParams::zeros(config);
    for (auto block : g.blocks()) std::fill(block.begin(), block.end(), 1.0);
    const double n = std::sqrt(static_cast<double>(g.size()));
    CHECK(std::abs(clip_global_norm(g, 0.0) - n) <= 1e-12);
    CHECK(std::abs(clip_global_norm(g, 1.0) - n) <= 1e-12);
    CHECK(std::abs(clip_global_norm(g, 100.0) - 1.0) <= 1e-12);
}

TEST_CASE("gradcheck degenerate and small cases") {
    const NetworkConfig tiny{{2}, {0.0}};
    Rng rng(47);
    auto p = init_params(tiny);
    for (auto block : p.blocks()) {
        for (double& x : block) x *= 0.05;
    }
    const auto batch = random_batch(2, 3, rng);
    const std::vector<double> targets{0.2, 0.7};
    CHECK(finite_diff_gradcheck(p, tiny, batch, targets, 0) == 0.0);
    CHECK(finite_diff_gradcheck(p, tiny, batch, targets, p.size()) < 1e-6);
}

TEST_CASE("gradcheck ignores dropout rates") {
    const NetworkConfig config{{3, 2}, {0.5, 0.5}};
    Rng rng(48);
    const auto p = init_params(config);
    const auto batch = random_batch(2, 4, rng);
    const std::vector<double> targets{0.1, 0.9};
    CHECK(finite_diff_gradcheck(p, config, batch, targets, p.size()) < 1e-4);
}

TEST_CASE("gradcheck on the default architecture with 50 probes") {
    const NetworkConfig config;
    Rng rng(49);
    const auto p = init_params(config);
    const auto batch = random_batch(2, 5, rng);
    const std::vector<double> targets{0.3, 0.6};
    CHECK(finite_diff_gradcheck(p, config, batch, targets, 50) < 1e-4);
}
