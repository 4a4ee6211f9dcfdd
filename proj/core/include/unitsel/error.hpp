#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace unitsel {

enum class ErrorCode {
    kIo,
    kBadMagic,
    kVersionMismatch,
    kTruncated,
    kTrailingBytes,
    kInvalidHeader,
    kNonFinite,
    kUnitOutOfRange,
    kLengthMismatch,
    kDimensionMismatch,
    kMalformedRecord,
    kDuplicateId,
    kUnresolvablePath,
    kInvalidArgument,
    kInsufficientData,
    kEmptyInput,
    kCodebookMismatch,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (and tests)
// can tell e.g. a bad magic from a truncated payload without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace unitsel
