#include "lfqa/error.hpp"

namespace lfqa {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kFormat: return "format_error";
    case ErrorCode::kMissingManifest: return "missing_manifest";
    case ErrorCode::kViewCountMismatch: return "view_count_mismatch";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kDisconnected: return "disconnected";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kRejected: return "rejected";
    case ErrorCode::kUnsupported: return "unsupported";
  }
  return "unknown";
}

}  // namespace lfqa
