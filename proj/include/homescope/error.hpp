#pragma once

#include <stdexcept>
#include <string>

namespace homescope {

enum class ErrorCode {
    // wire-codec
    FormatError,
    UnsupportedLinkType,
    TruncatedCapture,
    TruncatedHeader,
    UnsupportedVersion,
    MissingAddress4,
    MalformedTags,
    InvalidChannel,
    ParseError,
    // ble-codec
    MalformedAd,
    MalformedUuidList,
    MalformedManufacturer,
    // identity-registry
    RetriableLookupError,
    // traffic-analysis
    InvalidRange,
    InvalidParameter,
    InsufficientData,
    // rf-localization
    DegenerateLayout,
    UndefinedDirection,
    DuplicateLabel,
    NoComparableReference,
    // har-engine
    RuleError,
    GridMismatch,
    // scenario-sim
    ScenarioError,
    // general
    IoError,
};

const char* error_code_name(ErrorCode code);

/// Single exception type for all typed errors; `code()` carries the contract
/// violation, the message carries context (line numbers, paths, values).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace homescope
