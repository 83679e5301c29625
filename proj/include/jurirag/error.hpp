#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jurirag {

enum class ErrorCode {
    Io,
    Parse,
    InvalidArgument,
    DuplicateId,
    UnknownToken,
    UnknownEntity,
    MissingMarkers,
    EmptyText,
    ZeroVector,
    LengthMismatch,
    DimensionMismatch,
    Unnormalized,
    BadFormat,
    EmptyIndex,
    AmbiguousDocument,
    LlmUnavailable,
    Transport,
    HttpStatus,
    NoClaims,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a code so callers (CLI exit
/// status, HTTP error objects, tests) can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace jurirag
