#ifndef VIP_ERROR_HPP
#define VIP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace vip {

enum class ErrorKind {
  InsufficientNeighbors,
  SingularMoment,
  NonconformingSpacing,
  DuplicateNode,
  SizeMismatch,
  DegreeTooLow,
  DimensionMismatch,
  RealizationFailure,
  SingularSystem,
  NoConvergence,
  TooLarge,
  Config,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InsufficientNeighbors: return "InsufficientNeighbors";
    case ErrorKind::SingularMoment: return "SingularMoment";
    case ErrorKind::NonconformingSpacing: return "NonconformingSpacing";
    case ErrorKind::DuplicateNode: return "DuplicateNode";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::DegreeTooLow: return "DegreeTooLow";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RealizationFailure: return "RealizationFailure";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` discriminates the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vip

#endif
