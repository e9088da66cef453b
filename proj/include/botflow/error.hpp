#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace botflow {

enum class ErrorCode : std::uint8_t {
  InvalidArgument,
  Io,
  MalformedRow,
  UnknownScenario,
  EmptyInput,
  EmptyValues,
  TimeBeforeOrigin,
  SchemaMismatch,
  ShapeMismatch,
  TooFewRows,
  BadComponentCount,
  SingleClassInput,
  DegenerateSplit,
  DegenerateRow,
  NonFiniteLoss,
  CorruptModel,
  SchemaVersionMismatch,
  LengthMismatch,
  BadBins,
  BadConfig,
};

const char* error_code_name(ErrorCode code) noexcept;

// Single exception type for the core library; the code drives C API status
// mapping and CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// MalformedRow carries the 1-based source line number.
class MalformedRowError : public Error {
 public:
  MalformedRowError(std::size_t line_no, const std::string& reason)
      : Error(ErrorCode::MalformedRow,
              "line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

}  // namespace botflow
