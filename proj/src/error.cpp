#include "iatr/error.hpp"

namespace iatr {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::BadF: return "BadF";
    case ErrorCode::BadS: return "BadS";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InsufficientClasses: return "InsufficientClasses";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::EmptyVotes: return "EmptyVotes";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::TooFewWindows: return "TooFewWindows";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::BadScaling: return "BadScaling";
    case ErrorCode::ChannelNotFound: return "ChannelNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadK:
    case ErrorCode::BadF:
    case ErrorCode::BadS:
    case ErrorCode::BadConfig:
    case ErrorCode::MissingFile:
      return 2;
    case ErrorCode::InvariantViolation:
      return 4;
    default:
      return 3;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace iatr
