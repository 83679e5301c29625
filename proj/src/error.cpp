#include "jurirag/error.hpp"

namespace jurirag {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::UnknownToken: return "UnknownToken";
        case ErrorCode::UnknownEntity: return "UnknownEntity";
        case ErrorCode::MissingMarkers: return "MissingMarkers";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::Unnormalized: return "Unnormalized";
        case ErrorCode::BadFormat: return "BadFormat";
        case ErrorCode::EmptyIndex: return "EmptyIndex";
        case ErrorCode::AmbiguousDocument: return "AmbiguousDocument";
        case ErrorCode::LlmUnavailable: return "LlmUnavailable";
        case ErrorCode::Transport: return "Transport";
        case ErrorCode::HttpStatus: return "HttpStatus";
        case ErrorCode::NoClaims: return "NoClaims";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace jurirag
