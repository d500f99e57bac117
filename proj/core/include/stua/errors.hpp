#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stua {

/// Error classes surfaced by the library. Each maps to a distinct process
/// exit code in the command-line tool.
enum class ErrorKind {
  InvalidConfig,
  Io,
  Parse,
  DegenerateGeometry,
  DegenerateDegree,
  EmptyPeriod,
  InsufficientHistory,
  DimensionMismatch,
  MissingData,
  UnknownRegion,
  DuplicateCell,
  NonmonotonicTimestamp,
  IrregularTimestamp,
  NonFiniteLoss,
  UndefinedMetric,
  Checkpoint,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

std::string_view to_string(ErrorKind kind);

/// Process exit code for an error class; 0 and 1 are reserved for success
/// and usage errors.
int exit_code(ErrorKind kind);

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace stua
