#include "advaudio/error.hpp"

namespace advaudio {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NotWav: return "NotWav";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ClipTooShort: return "ClipTooShort";
    case ErrorCode::DegenerateFilter: return "DegenerateFilter";
    case ErrorCode::ModelShapeMismatch: return "ModelShapeMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InsufficientCorpus: return "InsufficientCorpus";
    case ErrorCode::EmptyRecords: return "EmptyRecords";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail)
    , code_(code)
    , detail_(detail)
{
}

} // namespace advaudio
