#include "seqcast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqcast/error.hpp"

namespace seqcast {

bool ScalerParams::valid() const noexcept {
    return std::isfinite(min_value) && std::isfinite(max_value) && max_value > min_value;
}

ScalerParams fit_scaler(std::span<const double> train_values) {
    if (train_values.size() < 2) throw Error(Errc::TooFewValues, "need at least 2 values");
    const auto [lo, hi] = std::minmax_element(train_values.begin(), train_values.end());
    if (!(*hi > *lo)) throw Error(Errc::DegenerateRange, "all training values are equal");
    return {*lo, *hi};
}

namespace {
void require_valid(const ScalerParams& p) {
    if (!p.valid()) throw Error(Errc::InvalidScaler, "max must exceed min");
}
} // namespace

double transform(const ScalerParams& params, double value) {
    require_valid(params);
    return (value - params.min_value) / (params.max_value - params.min_value);
}

std::vector<double> transform(const ScalerParams& params, std::span<const double> values) {
    require_valid(params);
    const double range = params.max_value - params.min_value;
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(),
                   [&](double v) { return (v - params.min_value) / range; });
    return out;
}

double inverse_transform(const ScalerParams& params, double scaled) {
    require_valid(params);
    return scaled * (params.max_value - params.min_value) + params.min_value;
}

std::vector<double> inverse_transform(const ScalerParams& params, std::span<const double> scaled) {
    require_valid(params);
    const double range = params.max_value - params.min_value;
    std::vector<double> out(scaled.size());
    std::transform(scaled.begin(), scaled.end(), out.begin(),
                   [&](double s) { return s * range + params.min_value; });
    return out;
}

WindowedDataset make_windows(std::span<const double> values, std::size_t window,
                             std::span<const Date> dates) {
    if (window < 1) throw Error(Errc::InvalidWindow, "window must be >= 1");
    if (values.size() <= window) {
        throw Error(Errc::WindowTooLarge, std::to_string(values.size()) +
                                              " values leave no sample for window " +
                                              std::to_string(window));
    }
    if (!dates.empty() && dates.size() != values.size()) {
        throw Error(Errc::ShapeMismatch, "dates and values differ in length");
    }
    const std::size_t samples = values.size() - window;
    WindowedDataset ds;
    ds.window = window;
    ds.inputs.resize(samples * window);
    ds.targets.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(i), window,
                    ds.inputs.begin() + static_cast<std::ptrdiff_t>(i * window));
        ds.targets[i] = values[i + window];
    }
    if (!dates.empty()) ds.target_dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(window), dates.end());
    return ds;
}

WindowedDataset bridge_test_windows(std::span<const double> train_tail,
                                    std::span<const double> test_values, std::size_t window,
                                    std::span<const Date> test_dates) {
    if (window < 1) throw Error(Errc::InvalidWindow, "window must be >= 1");
    if (train_tail.size() != window) {
        throw Error(Errc::TailTooShort, "train tail has " + std::to_string(train_tail.size()) +
                                            " values, window is " + std::to_string(window));
    }
    if (!test_dates.empty() && test_dates.size() != test_values.size()) {
        throw Error(Errc::ShapeMismatch, "dates and values differ in length");
    }
    WindowedDataset ds;
    ds.window = window;
    if (test_values.empty()) return ds;

    std::vector<double> joined(train_tail.begin(), train_tail.end());
    joined.insert(joined.end(), test_values.begin(), test_values.end());
    ds = make_windows(joined, window);
    ds.target_dates.assign(test_dates.begin(), test_dates.end());
    return ds;
}

} // namespace seqcast
