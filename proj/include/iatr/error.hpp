#pragma once

#include <stdexcept>
#include <string>

namespace iatr {

enum class ErrorCode {
  // configuration / usage
  BadK,
  BadF,
  BadS,
  BadConfig,
  MissingFile,
  // data
  InvalidInput,
  DimensionMismatch,
  InsufficientClasses,
  UnknownClass,
  EmptyVotes,
  EmptyScores,
  SignalTooShort,
  WindowTooShort,
  TooFewWindows,
  MalformedHeader,
  SizeMismatch,
  BadScaling,
  ChannelNotFound,
  ParseError,
  // internal
  InvariantViolation,
};

const char* to_string(ErrorCode code) noexcept;

/// Process exit code for an error: 2 usage/config, 3 data, 4 internal invariant.
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace iatr
