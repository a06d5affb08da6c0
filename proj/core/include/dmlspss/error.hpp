#pragma once

#include <stdexcept>
#include <string>

namespace dmlspss {

enum class Errc {
  NonFinite,
  SchemaError,
  ParseError,
  IoError,
  IndexOutOfRange,
  DuplicateIndex,
  DimensionMismatch,
  InvalidConfig,
  InvalidFraction,
  InvalidSpec,
  InvalidAlpha,
  InvalidRho,
  SingularSystem,
  NonConvergence,
  FoldTooSmall,
  DegenerateFold,
  DegenerateAggregate,
  DegenerateJacobian,
  ReplicationFailed,
};

/// Broad failure class; the CLI maps these onto exit codes 2, 3 and 4.
enum class ErrorCategory { Config, Data, Numeric };

const char* to_string(Errc code) noexcept;
ErrorCategory category_of(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }
  /// Message without the leading code name.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace dmlspss
