#include "seqcast/market_data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <string>

#include "seqcast/error.hpp"

namespace seqcast {

namespace {

std::string_view trim(std::string_view s) noexcept {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string normalize_header(std::string_view name) {
    std::string out;
    for (char c : trim(name)) {
        if (c == ' ' || c == '_' || c == '"') continue;
        out.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string_view unquote(std::string_view s) noexcept {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

std::optional<double> parse_cell(std::string_view raw) {
    const std::string_view cell = trim(unquote(trim(raw)));
    if (cell.empty()) return std::nullopt;
    const std::string low = lower(cell);
    if (low == "null" || low == "nan" || low == "-nan" || low == "na") return std::nullopt;
    std::string_view digits = cell;
    if (digits.front() == '+') digits.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

void append_number(std::string& out, const std::optional<double>& v) {
    if (!v) return;
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), *v);
    out.append(buf.data(), ptr);
}

enum Column { kDate, kOpen, kHigh, kLow, kClose, kAdjClose, kVolume, kColumnCount };

} // namespace

std::string_view to_string(PriceField field) noexcept {
    return field == PriceField::Close ? "close" : "adj_close";
}

PriceField price_field_from_string(std::string_view name) {
    const std::string n = normalize_header(name);
    if (n == "close") return PriceField::Close;
    if (n == "adjclose") return PriceField::AdjClose;
    throw Error(Errc::InvalidConfig, "unknown price field '" + std::string(name) + "'");
}

PriceSeries parse_csv(std::string_view text, std::string symbol) {
    PriceSeries series;
    series.symbol = std::move(symbol);

    std::array<std::optional<std::size_t>, kColumnCount> columns{};
    bool have_header = false;
    std::vector<std::pair<OhlcvBar, long>> rows;

    long line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;

        const auto cells = split_row(line);
        if (!have_header) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                const std::string name = normalize_header(cells[i]);
                std::optional<Column> col;
                if (name == "date") col = kDate;
                else if (name == "open") col = kOpen;
                else if (name == "high") col = kHigh;
                else if (name == "low") col = kLow;
                else if (name == "close") col = kClose;
                else if (name == "adjclose") col = kAdjClose;
                else if (name == "volume") col = kVolume;
                if (col && !columns[*col]) columns[*col] = i;
            }
            if (!columns[kDate]) throw Error(Errc::MissingColumn, "no Date column in header", line_no);
            if (!columns[kClose]) throw Error(Errc::MissingColumn, "no Close column in header", line_no);
            have_header = true;
            continue;
        }

        auto cell = [&](Column c) -> std::string_view {
            if (!columns[c] || *columns[c] >= cells.size()) return {};
            return cells[*columns[c]];
        };

        const std::string_view date_text = trim(unquote(trim(cell(kDate))));
        const auto date = Date::parse(date_text);
        if (!date) {
            throw Error(Errc::BadDate,
                        "line " + std::to_string(line_no) + ": '" + std::string(date_text) + "'",
                        line_no);
        }
        OhlcvBar bar;
        bar.date = *date;
        bar.open = parse_cell(cell(kOpen));
        bar.high = parse_cell(cell(kHigh));
        bar.low = parse_cell(cell(kLow));
        bar.close = parse_cell(cell(kClose));
        bar.adj_close = parse_cell(cell(kAdjClose));
        bar.volume = parse_cell(cell(kVolume));
        if (bar.volume && *bar.volume < 0.0) bar.volume.reset();
        rows.emplace_back(bar, line_no);
    }
    if (!have_header) throw Error(Errc::MissingColumn, "empty input, no header row");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first.date < b.first.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first.date == rows[i - 1].first.date) {
            throw Error(Errc::DuplicateDate,
                        "line " + std::to_string(rows[i].second) + ": " + rows[i].first.date.iso(),
                        rows[i].second);
        }
    }
    series.bars.reserve(rows.size());
    for (auto& [bar, line] : rows) series.bars.push_back(bar);
    return series;
}

std::string serialize_csv(const PriceSeries& series) {
    std::string out = "Date,Open,High,Low,Close,Adj Close,Volume\n";
    for (const auto& bar : series.bars) {
        out += bar.date.iso();
        for (const auto* field : {&bar.open, &bar.high, &bar.low, &bar.close, &bar.adj_close, &bar.volume}) {
            out += ',';
            append_number(out, *field);
        }
        out += '\n';
    }
    return out;
}

DropResult drop_missing(const PriceSeries& series) {
    DropResult result;
    result.series.symbol = series.symbol;
    for (const auto& bar : series.bars) {
        if (bar.has_all_prices()) result.series.bars.push_back(bar);
    }
    result.dropped = series.size() - result.series.size();
    return result;
}

PriceSeries filter_dates(const PriceSeries& series, Date start, Date end) {
    PriceSeries out;
    out.symbol = series.symbol;
    for (const auto& bar : series.bars) {
        if (bar.date >= start && bar.date <= end) out.bars.push_back(bar);
    }
    return out;
}

std::vector<double> price_values(const PriceSeries& series, PriceField field) {
    std::vector<double> values;
    values.reserve(series.size());
    for (const auto& bar : series.bars) {
        const auto& v = field == PriceField::Close ? bar.close : bar.adj_close;
        if (!v) {
            throw Error(Errc::EmptySeries, "missing " + std::string(to_string(field)) + " on " +
                                               bar.date.iso());
        }
        values.push_back(*v);
    }
    return values;
}

std::optional<double> MovingAverage::at(std::size_t input_index) const noexcept {
    if (window == 0 || input_index + 1 < window) return std::nullopt;
    const std::size_t k = input_index + 1 - window;
    if (k >= values.size()) return std::nullopt;
    return values[k];
}

MovingAverage sma(std::span<const double> prices, std::size_t window) {
    if (window < 1) throw Error(Errc::InvalidWindow, "window must be >= 1");
    if (prices.size() < window) {
        throw Error(Errc::InsufficientData, std::to_string(prices.size()) + " values for window " +
                                                std::to_string(window));
    }
    MovingAverage out;
    out.window = window;
    out.values.reserve(prices.size() - window + 1);
    // Each window is summed from scratch so values never accumulate drift.
    for (std::size_t end = window; end <= prices.size(); ++end) {
        double sum = 0.0;
        for (std::size_t i = end - window; i < end; ++i) sum += prices[i];
        out.values.push_back(sum / static_cast<double>(window));
    }
    return out;
}

std::size_t split_index(std::size_t length, double ratio) {
    // The epsilon absorbs representation error, e.g. 0.29 * 100 = 28.999...
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(length) + 1e-9));
}

SplitResult chronological_split(const PriceSeries& series, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error(Errc::BadRatio, "ratio must lie in (0, 1)");
    if (series.empty()) throw Error(Errc::EmptySeries, "cannot split an empty series");
    const std::size_t cut = split_index(series.size(), ratio);
    SplitResult out;
    out.ratio = ratio;
    out.train.symbol = series.symbol;
    out.test.symbol = series.symbol;
    out.train.bars.assign(series.bars.begin(), series.bars.begin() + static_cast<std::ptrdiff_t>(cut));
    out.test.bars.assign(series.bars.begin() + static_cast<std::ptrdiff_t>(cut), series.bars.end());
    return out;
}

} // namespace seqcast
