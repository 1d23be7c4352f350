#pragma once

#include <stdexcept>
#include <string>

namespace camsic {

enum class ErrorCode {
  kDimension,
  kParameter,
  kIo,
  kFormat,
  kBadMagic,
  kUnsupportedVersion,
  kChecksum,
  kTruncated,
  kSchema,
  kSchedule,
  kProtocol,
  kDecode,
  kDigestMismatch,
  kComputation,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) fail(code, what);
}

}  // namespace camsic
