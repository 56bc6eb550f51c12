#include "qkdnet/error.hpp"

namespace qkdnet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kOutOfRange: return "OutOfRange";
    case ErrorKind::kParameterViolation: return "ParameterViolation";
    case ErrorKind::kInsufficientConnectivity: return "InsufficientConnectivity";
    case ErrorKind::kInsufficientKey: return "InsufficientKey";
    case ErrorKind::kLinkDown: return "LinkDown";
    case ErrorKind::kAuthFailure: return "AuthFailure";
    case ErrorKind::kBoundExceeded: return "BoundExceeded";
    case ErrorKind::kEndpointCorruption: return "EndpointCorruption";
    case ErrorKind::kTooLarge: return "TooLarge";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kValidationError: return "ValidationError";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

InsufficientConnectivity::InsufficientConnectivity(std::size_t requested,
                                                   std::size_t achievable)
    : Error(ErrorKind::kInsufficientConnectivity,
            "requested " + std::to_string(requested) +
                " vertex-disjoint paths, max=" + std::to_string(achievable)),
      requested_(requested),
      achievable_(achievable) {}

}  // namespace qkdnet
