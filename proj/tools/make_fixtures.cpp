// Writes deterministic synthetic daily bars for the nine sector ETFs.
// Usage: make_fixtures <output dir>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "seqcast/date.hpp"
#include "seqcast/market_data.hpp"
#include "seqcast/random.hpp"

using namespace seqcast;

namespace {

struct Spec {
    const char* symbol;
    double start_price;
    double drift;      // daily log drift
    double volatility; // daily log sd
    std::uint64_t seed;
};

double normal(Rng& rng) {
    double u1 = rng.uniform01();
    while (u1 <= 0.0) u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double round_cents(double v) { return std::round(v * 100.0) / 100.0; }

PriceSeries generate(const Spec& s) {
    Rng rng(s.seed);
    PriceSeries series;
    series.symbol = s.symbol;
    const Date first = Date::from_ymd(2012, 1, 1);
    const Date last = Date::from_ymd(2022, 12, 21);
    double close = s.start_price;
    for (Date d = first; d <= last; d = Date::from_days(d.days() + 1)) {
        if (d.weekday() == 0 || d.weekday() == 6) continue;
        const double open = close * std::exp(0.3 * s.volatility * normal(rng));
        close = close * std::exp(s.drift + s.volatility * normal(rng));
        const double spread = std::abs(s.volatility * normal(rng));
        OhlcvBar bar;
        bar.date = d;
        bar.open = round_cents(open);
        bar.close = round_cents(close);
        bar.high = round_cents(std::max(open, close) * (1.0 + spread));
        bar.low = round_cents(std::min(open, close) * (1.0 - spread));
        bar.adj_close = round_cents(close * 0.97);
        bar.volume = std::floor(2.0e6 * std::exp(0.4 * normal(rng)));
        // Occasional missing quote, as seen in vendor downloads.
        if (rng.below(400) == 0) bar.close.reset();
        series.bars.push_back(bar);
    }
    return series;
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <output dir>\n";
        return 2;
    }
    const std::filesystem::path dir = argv[1];
    std::filesystem::create_directories(dir);
    const std::vector<Spec> specs = {
        {"VGT", 70.0, 0.00045, 0.0140, 101}, {"VFH", 30.0, 0.00030, 0.0130, 102},
        {"VCR", 65.0, 0.00035, 0.0130, 103}, {"VHT", 60.0, 0.00035, 0.0110, 104},
        {"VOX", 65.0, 0.00020, 0.0120, 105}, {"VIS", 65.0, 0.00030, 0.0120, 106},
        {"VDE", 100.0, 0.00000, 0.0180, 107}, {"VNQ", 60.0, 0.00020, 0.0120, 108},
        {"VPU", 75.0, 0.00025, 0.0100, 109},
    };
    for (const auto& s : specs) {
        const auto path = dir / (std::string(s.symbol) + ".csv");
        std::ofstream out(path, std::ios::binary);
        out << serialize_csv(generate(s));
        if (!out) {
            std::cerr << "cannot write " << path << '\n';
            return 1;
        }
        std::cout << path.string() << '\n';
    }
    return 0;
}
