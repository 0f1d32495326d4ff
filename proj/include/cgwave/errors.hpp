#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cgw {

enum class ErrorCode {
  LadderMismatch,
  EmptyDomain,
  UnknownNonlinearity,
  GridTooCoarse,
  OutOfDomain,
  InsufficientLadder,
  BadSpec,
  LatticeMismatch,
  NoConvergence,
  BadRegionLadder,
  InvalidArgument,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::LadderMismatch: return "LadderMismatch";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::UnknownNonlinearity: return "UnknownNonlinearity";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::InsufficientLadder: return "InsufficientLadder";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::LatticeMismatch: return "LatticeMismatch";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BadRegionLadder: return "BadRegionLadder";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every library failure is reported through this type; `code()` identifies the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace cgw
