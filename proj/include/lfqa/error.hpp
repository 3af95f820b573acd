#pragma once

#include <stdexcept>
#include <string>

namespace lfqa {

// The code name doubles as the machine-parsable prefix the CLI prints.
enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kFormat,
  kMissingManifest,
  kViewCountMismatch,
  kDimensionMismatch,
  kOutOfRange,
  kDisconnected,
  kNotFound,
  kRejected,
  kUnsupported,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lfqa
