#include "unitsel/error.hpp"

namespace unitsel {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kIo: return "io";
        case ErrorCode::kBadMagic: return "bad-magic";
        case ErrorCode::kVersionMismatch: return "version-mismatch";
        case ErrorCode::kTruncated: return "truncated";
        case ErrorCode::kTrailingBytes: return "trailing-bytes";
        case ErrorCode::kInvalidHeader: return "invalid-header";
        case ErrorCode::kNonFinite: return "non-finite";
        case ErrorCode::kUnitOutOfRange: return "unit-out-of-range";
        case ErrorCode::kLengthMismatch: return "length-mismatch";
        case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
        case ErrorCode::kMalformedRecord: return "malformed-record";
        case ErrorCode::kDuplicateId: return "duplicate-id";
        case ErrorCode::kUnresolvablePath: return "unresolvable-path";
        case ErrorCode::kInvalidArgument: return "invalid-argument";
        case ErrorCode::kInsufficientData: return "insufficient-data";
        case ErrorCode::kEmptyInput: return "empty-input";
        case ErrorCode::kCodebookMismatch: return "codebook-mismatch";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace unitsel
