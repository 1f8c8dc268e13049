#pragma once

#include <span>
#include <string>

#include "seqcast/date.hpp"

namespace seqcast {

/// Self-contained SVG line chart: actual prices as a green polyline,
/// predictions as a red polyline, plus axes, min/max labels and a legend.
/// `dates` may be empty (x labels then show sample indices).
std::string render_prediction_chart(const std::string& title, std::span<const Date> dates,
                                    std::span<const double> actual, std::span<const double> predicted);

} // namespace seqcast
