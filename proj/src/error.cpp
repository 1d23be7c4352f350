#include "camsic/error.hpp"

namespace camsic {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimension: return "dimension error";
    case ErrorCode::kParameter: return "parameter error";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported version";
    case ErrorCode::kChecksum: return "checksum error";
    case ErrorCode::kTruncated: return "truncated input";
    case ErrorCode::kSchema: return "schema error";
    case ErrorCode::kSchedule: return "schedule error";
    case ErrorCode::kProtocol: return "protocol error";
    case ErrorCode::kDecode: return "decode error";
    case ErrorCode::kDigestMismatch: return "weights mismatch";
    case ErrorCode::kComputation: return "computation error";
  }
  return "unknown error";
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace camsic
