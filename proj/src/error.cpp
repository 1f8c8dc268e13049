#include "seqcast/error.hpp"

namespace seqcast {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::BadDate: return "BadDate";
    case Errc::DuplicateDate: return "DuplicateDate";
    case Errc::NetworkError: return "NetworkError";
    case Errc::HttpStatus: return "HttpStatus";
    case Errc::EmptyBody: return "EmptyBody";
    case Errc::InvalidWindow: return "InvalidWindow";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::BadRatio: return "BadRatio";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::DegenerateRange: return "DegenerateRange";
    case Errc::TooFewValues: return "TooFewValues";
    case Errc::InvalidScaler: return "InvalidScaler";
    case Errc::WindowTooLarge: return "WindowTooLarge";
    case Errc::TailTooShort: return "TailTooShort";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptySequence: return "EmptySequence";
    case Errc::BadRate: return "BadRate";
    case Errc::StaleCache: return "StaleCache";
    case Errc::EmptySet: return "EmptySet";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::AllExcluded: return "AllExcluded";
    case Errc::ScalerMismatch: return "ScalerMismatch";
    case Errc::ConfigMismatch: return "ConfigMismatch";
    case Errc::BadCheckpoint: return "BadCheckpoint";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

namespace {
std::string compose(Errc code, const std::string& message) {
    std::string out{to_string(code)};
    if (!message.empty()) {
        out += ": ";
        out += message;
    }
    return out;
}
} // namespace

Error::Error(Errc code, const std::string& message, long detail)
    : std::runtime_error(compose(code, message)), code_(code), detail_(detail) {}

} // namespace seqcast
