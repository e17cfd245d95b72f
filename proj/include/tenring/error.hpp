#pragma once

#include <stdexcept>
#include <string>

namespace tenring {

/// Error categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
  invalid_argument = 1,
  dimension_mismatch = 2,
  io = 3,
  bad_magic = 4,
  truncated = 5,
  version_mismatch = 6,
  non_finite = 7,
  solver_aborted = 8,
  numerical = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) fail(code, what);
}

}  // namespace tenring
