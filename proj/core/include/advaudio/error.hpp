#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace advaudio {

enum class ErrorCode {
    NotWav,
    UnsupportedFormat,
    IoError,
    ClipTooShort,
    DegenerateFilter,
    ModelShapeMismatch,
    InsufficientData,
    UnknownLabel,
    CorruptModel,
    InvalidTarget,
    InvalidConfig,
    LengthMismatch,
    InsufficientCorpus,
    EmptyRecords,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above; the
// message is prefixed with the code name so CLI diagnostics stay greppable.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

} // namespace advaudio
