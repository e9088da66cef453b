#include "botflow/error.hpp"

namespace botflow {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyValues: return "EmptyValues";
    case ErrorCode::TimeBeforeOrigin: return "TimeBeforeOrigin";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::BadComponentCount: return "BadComponentCount";
    case ErrorCode::SingleClassInput: return "SingleClassInput";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::DegenerateRow: return "DegenerateRow";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BadBins: return "BadBins";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

}  // namespace botflow
