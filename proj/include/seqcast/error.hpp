#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seqcast {

enum class Errc {
    // market data
    MissingColumn,
    BadDate,
    DuplicateDate,
    NetworkError,
    HttpStatus,
    EmptyBody,
    InvalidWindow,
    InsufficientData,
    BadRatio,
    EmptySeries,
    // preprocessing
    DegenerateRange,
    TooFewValues,
    InvalidScaler,
    WindowTooLarge,
    TailTooShort,
    // network
    InvalidConfig,
    ShapeMismatch,
    EmptySequence,
    BadRate,
    StaleCache,
    // training / evaluation
    EmptySet,
    EmptyDataset,
    ZeroVariance,
    AllExcluded,
    ScalerMismatch,
    // pipeline plumbing
    ConfigMismatch,
    BadCheckpoint,
    Io,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library. `code()` identifies the failure kind;
/// `detail()` carries an auxiliary integer (the HTTP status for HttpStatus,
/// the 1-based input line for parse errors, otherwise 0).
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, long detail = 0);

    Errc code() const noexcept { return code_; }
    long detail() const noexcept { return detail_; }

private:
    Errc code_;
    long detail_;
};

} // namespace seqcast
