#pragma once

#include <stdexcept>
#include <string>

namespace annotkit {

// Mirrors annotkit_status in the C header; values must stay in sync.
enum class ErrorCode {
  invalid_argument = 1,
  io = 2,
  parse = 3,
  validation = 4,
  reference = 5,
  undefined = 6,
  conflict = 7,
  state = 8,
  locked = 9,
  internal = 10,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace annotkit
