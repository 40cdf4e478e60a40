#ifndef TRENDKIT_ERROR_HPP
#define TRENDKIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace trendkit {

enum class ErrorCode {
    UnreadableInput,
    OverlappingBoundaries,
    EmptyMatrix,
    KTooLarge,
    EmptyCorpus,
    KExceedsVocabulary,
    DocOutOfRange,
    MissingAssignment,
    EmptyInput,
    CanvasTooSmall,
    NestedTiming,
    BadConfig,
    IoError,
};

const char* error_code_name(ErrorCode code);

// All recoverable failures surface as this exception; entry-level parse
// problems are diagnostics, not errors, and never throw.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace trendkit

#endif
