#include "homescope/error.hpp"

namespace homescope {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UnsupportedLinkType: return "UnsupportedLinkType";
    case ErrorCode::TruncatedCapture: return "TruncatedCapture";
    case ErrorCode::TruncatedHeader: return "TruncatedHeader";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::MissingAddress4: return "MissingAddress4";
    case ErrorCode::MalformedTags: return "MalformedTags";
    case ErrorCode::InvalidChannel: return "InvalidChannel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MalformedAd: return "MalformedAd";
    case ErrorCode::MalformedUuidList: return "MalformedUuidList";
    case ErrorCode::MalformedManufacturer: return "MalformedManufacturer";
    case ErrorCode::RetriableLookupError: return "RetriableLookupError";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateLayout: return "DegenerateLayout";
    case ErrorCode::UndefinedDirection: return "UndefinedDirection";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::NoComparableReference: return "NoComparableReference";
    case ErrorCode::RuleError: return "RuleError";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ScenarioError: return "ScenarioError";
    case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

} // namespace homescope
