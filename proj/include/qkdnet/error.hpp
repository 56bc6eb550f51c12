#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qkdnet {

enum class ErrorKind {
  kLengthMismatch,
  kEmptyInput,
  kOutOfRange,
  kParameterViolation,
  kInsufficientConnectivity,
  kInsufficientKey,
  kLinkDown,
  kAuthFailure,
  kBoundExceeded,
  kEndpointCorruption,
  kTooLarge,
  kParseError,
  kValidationError,
  kIoError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so that
// callers (and the Python bindings) can branch on it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InsufficientConnectivity : public Error {
 public:
  InsufficientConnectivity(std::size_t requested, std::size_t achievable);

  std::size_t requested() const noexcept { return requested_; }
  std::size_t achievable() const noexcept { return achievable_; }

 private:
  std::size_t requested_;
  std::size_t achievable_;
};

}  // namespace qkdnet
