#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqcast/date.hpp"

namespace seqcast {

/// One daily bar. Absent cells are std::nullopt. OHLC ordering is not
/// checked; vendor files routinely break it.
struct OhlcvBar {
    Date date;
    std::optional<double> open;
    std::optional<double> high;
    std::optional<double> low;
    std::optional<double> close;
    std::optional<double> adj_close;
    std::optional<double> volume;

    bool has_all_prices() const noexcept {
        return open && high && low && close && adj_close;
    }

    friend bool operator==(const OhlcvBar&, const OhlcvBar&) = default;
};

/// Bars for one ticker, strictly increasing by date.
struct PriceSeries {
    std::string symbol;
    std::vector<OhlcvBar> bars;

    std::size_t size() const noexcept { return bars.size(); }
    bool empty() const noexcept { return bars.empty(); }

    friend bool operator==(const PriceSeries&, const PriceSeries&) = default;
};

enum class PriceField { Close, AdjClose };

std::string_view to_string(PriceField field) noexcept;
PriceField price_field_from_string(std::string_view name);

/// Parses a vendor CSV. Columns are located by header name (case, spaces and
/// underscores ignored); Date and Close are required, the rest optional.
/// Empty, whitespace-only, "null", "nan" and non-finite cells become missing,
/// as does a negative volume. Output is sorted ascending by date.
///
/// Throws Error{MissingColumn | BadDate | DuplicateDate}; BadDate and
/// DuplicateDate carry the 1-based line number in detail().
PriceSeries parse_csv(std::string_view text, std::string symbol = {});

/// Writes Date,Open,High,Low,Close,Adj Close,Volume with shortest round-trip
/// number formatting and empty cells for missing values.
std::string serialize_csv(const PriceSeries& series);

/// Substitutes {symbol}, {start} and {end} (YYYY-MM-DD) into the template.
std::string expand_endpoint(std::string_view endpoint_template, std::string_view symbol,
                            Date start, Date end);

/// Blocking HTTP(S) GET of the expanded endpoint; returns the body on 200.
/// Throws Error{NetworkError | HttpStatus (status in detail()) | EmptyBody}.
std::string fetch_remote(std::string_view endpoint_template, std::string_view symbol,
                         Date start, Date end, int timeout_seconds = 30);

struct DropResult {
    PriceSeries series;
    std::size_t dropped = 0;
};

/// Removes bars with any missing price field. Volume is not a price field.
DropResult drop_missing(const PriceSeries& series);

/// Keeps bars with start <= date <= end.
PriceSeries filter_dates(const PriceSeries& series, Date start, Date end);

/// Extracts one price channel. Throws EmptySeries if any selected value is
/// missing (call drop_missing first).
std::vector<double> price_values(const PriceSeries& series, PriceField field);

/// Trailing simple moving average. `values[k]` is the mean of inputs
/// k .. k + window - 1, i.e. it aligns with input index k + window - 1.
struct MovingAverage {
    std::size_t window = 0;
    std::vector<double> values;

    /// Value aligned with an input index; nullopt for the first window-1
    /// positions and past the end.
    std::optional<double> at(std::size_t input_index) const noexcept;
};

/// Throws InvalidWindow (window < 1) or InsufficientData (fewer inputs than
/// window).
MovingAverage sma(std::span<const double> prices, std::size_t window);

struct SplitResult {
    PriceSeries train;
    PriceSeries test;
    double ratio = 0.0;
};

/// First floor(ratio * L) bars train, the rest test; no shuffling.
/// Throws BadRatio (ratio outside (0,1)) or EmptySeries.
SplitResult chronological_split(const PriceSeries& series, double ratio);

std::size_t split_index(std::size_t length, double ratio);

} // namespace seqcast
