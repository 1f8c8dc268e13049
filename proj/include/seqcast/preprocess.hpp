#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "seqcast/date.hpp"

namespace seqcast {

/// Min-max scaling parameters, fit on the training split only.
struct ScalerParams {
    double min_value = 0.0;
    double max_value = 1.0;

    bool valid() const noexcept;

    friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

/// Throws TooFewValues (< 2 values) or DegenerateRange (all equal).
ScalerParams fit_scaler(std::span<const double> train_values);

/// (v - min) / (max - min). Values outside the training range map outside
/// [0, 1] and are kept. Throws InvalidScaler for invalid params.
std::vector<double> transform(const ScalerParams& params, std::span<const double> values);
double transform(const ScalerParams& params, double value);

std::vector<double> inverse_transform(const ScalerParams& params, std::span<const double> scaled);
double inverse_transform(const ScalerParams& params, double scaled);

/// Supervised sliding-window samples with a one-step horizon.
///
/// Sample i has inputs `window` consecutive values and the value right after
/// them as target. Inputs are stored sample-major, one feature per step:
/// input(i, j) = inputs[i * window + j].
struct WindowedDataset {
    std::size_t window = 0;
    std::vector<double> inputs;
    std::vector<double> targets;
    /// Calendar day of each target; empty when built without dates.
    std::vector<Date> target_dates;

    std::size_t samples() const noexcept { return targets.size(); }
    double input(std::size_t sample, std::size_t step) const noexcept {
        return inputs[sample * window + step];
    }
    std::span<const double> sample_inputs(std::size_t sample) const noexcept {
        return {inputs.data() + sample * window, window};
    }
};

/// samples = values.size() - window. Throws InvalidWindow (window < 1) or
/// WindowTooLarge (values.size() <= window). `dates`, when non-empty, must
/// align with `values`.
WindowedDataset make_windows(std::span<const double> values, std::size_t window,
                             std::span<const Date> dates = {});

/// Windows over concat(train_tail, test_values) so every test value becomes
/// a target with a full history. train_tail must hold exactly `window`
/// values (TailTooShort otherwise); an empty test yields zero samples.
/// `test_dates`, when non-empty, align with `test_values`.
WindowedDataset bridge_test_windows(std::span<const double> train_tail,
                                    std::span<const double> test_values, std::size_t window,
                                    std::span<const Date> test_dates = {});

} // namespace seqcast
