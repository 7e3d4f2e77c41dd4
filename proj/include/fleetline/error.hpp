#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fleetline {

enum class ErrorCode {
  InvalidParam,
  InvalidLocation,
  OutOfRange,
  NonMonotonicTrack,
  CapacityError,
  FormatError,
  UncorrectableError,
  SegmentError,
  AuthFailure,
  NoOverlap,
  ColdStart,
  EmptyFleet,
  InvalidState,
  IllegalTransition,
  OverlapError,
  CorruptLog,
  NotFound,
  Forbidden,
  Unauthenticated,
  NotCompleted,
  AlreadyPaid,
  Conflict,
  ValidationError,
  DataDirNotEmpty,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (the HTTP layer, the CLI) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace fleetline
