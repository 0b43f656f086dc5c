#include "afdetect/error.hpp"

namespace afdetect {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::BadLabel: return "BadLabel";
    case ErrorKind::DuplicateSegment: return "DuplicateSegment";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::DegenerateClass: return "DegenerateClass";
    case ErrorKind::TooFewPerClass: return "TooFewPerClass";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::NegativeThreshold: return "NegativeThreshold";
    case ErrorKind::BadCutoff: return "BadCutoff";
    case ErrorKind::DegenerateSignal: return "DegenerateSignal";
    case ErrorKind::BadBand: return "BadBand";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::BadK: return "BadK";
    case ErrorKind::BadSubspace: return "BadSubspace";
    case ErrorKind::UndefinedMetric: return "UndefinedMetric";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::BadConfig:
      return ErrorCategory::Config;
    case ErrorKind::FileNotFound:
    case ErrorKind::IoError:
      return ErrorCategory::Io;
    case ErrorKind::MalformedRow:
    case ErrorKind::BadLabel:
    case ErrorKind::DuplicateSegment:
    case ErrorKind::EmptyDataset:
    case ErrorKind::DegenerateClass:
    case ErrorKind::TooFewPerClass:
    case ErrorKind::SingleClass:
    case ErrorKind::LengthMismatch:
    case ErrorKind::EmptyInput:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Numeric;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace afdetect
