#include "fleetline/error.hpp"

namespace fleetline {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::InvalidLocation: return "InvalidLocation";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonMonotonicTrack: return "NonMonotonicTrack";
    case ErrorCode::CapacityError: return "CapacityError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UncorrectableError: return "UncorrectableError";
    case ErrorCode::SegmentError: return "SegmentError";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::ColdStart: return "ColdStart";
    case ErrorCode::EmptyFleet: return "EmptyFleet";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::OverlapError: return "OverlapError";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Forbidden: return "Forbidden";
    case ErrorCode::Unauthenticated: return "Unauthenticated";
    case ErrorCode::NotCompleted: return "NotCompleted";
    case ErrorCode::AlreadyPaid: return "AlreadyPaid";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::DataDirNotEmpty: return "DataDirNotEmpty";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace fleetline
