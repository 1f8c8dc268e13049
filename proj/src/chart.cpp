#include "seqcast/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string_view>

#include "seqcast/error.hpp"

namespace seqcast {

namespace {

constexpr double kWidth = 960;
constexpr double kHeight = 480;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 50;

std::string fmt(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string render_prediction_chart(const std::string& title, std::span<const Date> dates,
                                    std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw Error(Errc::ShapeMismatch, "series lengths differ");
    if (!dates.empty() && dates.size() != actual.size()) throw Error(Errc::ShapeMismatch, "dates do not align");

    const std::size_t n = actual.size();
    double lo = 0.0, hi = 1.0;
    if (n > 0) {
        lo = std::min(*std::min_element(actual.begin(), actual.end()),
                      *std::min_element(predicted.begin(), predicted.end()));
        hi = std::max(*std::max_element(actual.begin(), actual.end()),
                      *std::max_element(predicted.begin(), predicted.end()));
    }
    if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto x_of = [&](std::size_t i) {
        return kLeft + (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1) : plot_w / 2);
    };
    auto y_of = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

    auto polyline = [&](std::span<const double> ys, std::string_view color, std::string_view cls) {
        std::string s = "  <polyline class=\"" + std::string(cls) + "\" fill=\"none\" stroke=\"" +
                        std::string(color) + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            if (i) s += ' ';
            s += fmt(x_of(i)) + "," + fmt(y_of(ys[i]));
        }
        return s + "\"/>\n";
    };

    auto x_label = [&](std::size_t i) { return dates.empty() ? std::to_string(i) : dates[i].iso(); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth, 0) + "\" height=\"" +
           fmt(kHeight, 0) + "\" viewBox=\"0 0 " + fmt(kWidth, 0) + " " + fmt(kHeight, 0) + "\">\n";
    svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "  <text x=\"" + fmt(kWidth / 2, 0) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + escape(title) + "</text>\n";

    // axes
    svg += "  <g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
    svg += "    <line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" +
           fmt(kTop + plot_h) + "\"/>\n";
    svg += "    <line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" + fmt(kLeft + plot_w) +
           "\" y2=\"" + fmt(kTop + plot_h) + "\"/>\n";
    svg += "  </g>\n";
    svg += "  <g class=\"labels\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "    <text x=\"" + fmt(kLeft - 6) + "\" y=\"" + fmt(kTop + 4) + "\" text-anchor=\"end\">" + fmt(hi) + "</text>\n";
    svg += "    <text x=\"" + fmt(kLeft - 6) + "\" y=\"" + fmt(kTop + plot_h) + "\" text-anchor=\"end\">" + fmt(lo) +
           "</text>\n";
    if (n > 0) {
        svg += "    <text x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop + plot_h + 18) + "\">" + x_label(0) + "</text>\n";
        svg += "    <text x=\"" + fmt(kLeft + plot_w) + "\" y=\"" + fmt(kTop + plot_h + 18) +
               "\" text-anchor=\"end\">" + x_label(n - 1) + "</text>\n";
    }
    svg += "  </g>\n";

    svg += polyline(actual, "green", "actual");
    svg += polyline(predicted, "red", "predicted");

    const double lx = kLeft + 12;
    const double ly = kTop + 10;
    svg += "  <g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "    <line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 24) + "\" y2=\"" + fmt(ly) +
           "\" stroke=\"green\" stroke-width=\"2\"/>\n";
    svg += "    <text x=\"" + fmt(lx + 30) + "\" y=\"" + fmt(ly + 4) + "\">Actual</text>\n";
    svg += "    <line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly + 18) + "\" x2=\"" + fmt(lx + 24) + "\" y2=\"" +
           fmt(ly + 18) + "\" stroke=\"red\" stroke-width=\"2\"/>\n";
    svg += "    <text x=\"" + fmt(lx + 30) + "\" y=\"" + fmt(ly + 22) + "\">Predicted</text>\n";
    svg += "  </g>\n";
    svg += "</svg>\n";
    return svg;
}

} // namespace seqcast
