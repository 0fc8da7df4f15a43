#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hrgc {

enum class ErrorKind {
  UnsupportedQ,
  DivisionByZero,
  InvalidM,
  InvalidAlpha,
  InvalidK,
  DeltaSearchFailed,
  IndexOutOfRange,
  LengthMismatch,
  NotEnoughHelpers,
  SingularSystem,
  LambdaCollision,
  AsymmetryDetected,
  InvalidParams,
  BadFormat,
  Io,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::UnsupportedQ: return "UnsupportedQ";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::InvalidM: return "InvalidM";
    case ErrorKind::InvalidAlpha: return "InvalidAlpha";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::DeltaSearchFailed: return "DeltaSearchFailed";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NotEnoughHelpers: return "NotEnoughHelpers";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::LambdaCollision: return "LambdaCollision";
    case ErrorKind::AsymmetryDetected: return "AsymmetryDetected";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::BadFormat: return "BadFormat";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

// All precondition and structural failures raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hrgc
