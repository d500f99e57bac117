#include "stua/errors.hpp"

namespace stua {

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::DegenerateDegree: return "DegenerateDegree";
    case ErrorKind::EmptyPeriod: return "EmptyPeriod";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MissingData: return "MissingData";
    case ErrorKind::UnknownRegion: return "UnknownRegion";
    case ErrorKind::DuplicateCell: return "DuplicateCell";
    case ErrorKind::NonmonotonicTimestamp: return "NonmonotonicTimestamp";
    case ErrorKind::IrregularTimestamp: return "IrregularTimestamp";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::UndefinedMetric: return "UndefinedMetric";
    case ErrorKind::Checkpoint: return "CheckpointError";
  }
  return "UnknownError";
}

int exit_code(ErrorKind kind) { return 2 + static_cast<int>(kind); }

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace stua
