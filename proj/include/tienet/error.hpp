#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tienet {

enum class ErrorCode {
  InvalidSize,
  InvalidArgument,
  ShapeMismatch,
  NonFinite,
  GenerationFailure,
  UndefinedMetric,
  Configuration,
  Divergence,
  Io,
  Format,
};

std::string_view to_string(ErrorCode code);

/// Exception carried by every failing operation in the library. The code is
/// stable and is what the CLI reports on its machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tienet
