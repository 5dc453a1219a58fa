#include "tienet/error.hpp"

namespace tienet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSize: return "invalid-size";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::ShapeMismatch: return "shape-mismatch";
    case ErrorCode::NonFinite: return "non-finite";
    case ErrorCode::GenerationFailure: return "generation-failure";
    case ErrorCode::UndefinedMetric: return "undefined-metric";
    case ErrorCode::Configuration: return "configuration";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::Io: return "io";
    case ErrorCode::Format: return "format";
  }
  return "unknown";
}

}  // namespace tienet
