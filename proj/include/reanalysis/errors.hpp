#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reanalysis {

enum class ErrorKind {
  InvalidParameter,
  UnsupportedModel,
  DegenerateElement,
  InvalidMaterial,
  InvalidState,
  UnstableStructure,
  NotDeterminate,
  BasisUnstable,
  NoConvergence,
  InvalidMeasurement,
  InternalError,
  SchemaViolation,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::UnsupportedModel: return "unsupported-model";
    case ErrorKind::DegenerateElement: return "degenerate-element";
    case ErrorKind::InvalidMaterial: return "invalid-material";
    case ErrorKind::InvalidState: return "invalid-state";
    case ErrorKind::UnstableStructure: return "unstable-structure";
    case ErrorKind::NotDeterminate: return "not-determinate";
    case ErrorKind::BasisUnstable: return "basis-unstable";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::InvalidMeasurement: return "invalid-measurement";
    case ErrorKind::InternalError: return "internal-error";
    case ErrorKind::SchemaViolation: return "schema-violation";
  }
  return "unknown";
}

}  // namespace reanalysis
