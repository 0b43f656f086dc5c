#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace afdetect {

enum class ErrorKind {
  // configuration
  BadConfig,
  // I/O
  FileNotFound,
  IoError,
  // data
  MalformedRow,
  BadLabel,
  DuplicateSegment,
  EmptyDataset,
  DegenerateClass,
  TooFewPerClass,
  SingleClass,
  LengthMismatch,
  EmptyInput,
  // numeric
  TooShort,
  NegativeThreshold,
  BadCutoff,
  DegenerateSignal,
  BadBand,
  Degenerate,
  TooFewRows,
  BadK,
  BadSubspace,
  UndefinedMetric,
};

/// Broad failure classes; the CLI maps each to a fixed process exit code.
enum class ErrorCategory { Config = 1, Io = 2, Data = 3, Numeric = 4 };

std::string_view to_string(ErrorKind kind) noexcept;
ErrorCategory category_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace afdetect
