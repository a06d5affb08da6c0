#include "dmlspss/error.hpp"

namespace dmlspss {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NonFinite: return "NonFinite";
    case Errc::SchemaError: return "SchemaError";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::DuplicateIndex: return "DuplicateIndex";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidFraction: return "InvalidFraction";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidAlpha: return "InvalidAlpha";
    case Errc::InvalidRho: return "InvalidRho";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::FoldTooSmall: return "FoldTooSmall";
    case Errc::DegenerateFold: return "DegenerateFold";
    case Errc::DegenerateAggregate: return "DegenerateAggregate";
    case Errc::DegenerateJacobian: return "DegenerateJacobian";
    case Errc::ReplicationFailed: return "ReplicationFailed";
  }
  return "Unknown";
}

ErrorCategory category_of(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidConfig:
    case Errc::InvalidFraction:
    case Errc::InvalidSpec:
    case Errc::InvalidAlpha:
    case Errc::InvalidRho:
      return ErrorCategory::Config;
    case Errc::NonFinite:
    case Errc::SchemaError:
    case Errc::ParseError:
    case Errc::IoError:
    case Errc::IndexOutOfRange:
    case Errc::DuplicateIndex:
    case Errc::DimensionMismatch:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Numeric;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

}  // namespace dmlspss
