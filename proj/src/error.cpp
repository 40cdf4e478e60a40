#include "trendkit/error.hpp"

namespace trendkit {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnreadableInput: return "UnreadableInput";
    case ErrorCode::OverlappingBoundaries: return "OverlappingBoundaries";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::KExceedsVocabulary: return "KExceedsVocabulary";
    case ErrorCode::DocOutOfRange: return "DocOutOfRange";
    case ErrorCode::MissingAssignment: return "MissingAssignment";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::CanvasTooSmall: return "CanvasTooSmall";
    case ErrorCode::NestedTiming: return "NestedTiming";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace trendkit
