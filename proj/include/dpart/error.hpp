#pragma once

#include <stdexcept>
#include <string>

namespace dpart {

enum class ErrorCode {
  InvalidArgument,  // bad user input: flags, specs, schemas, budgets
  Io,               // file system failures
  Parse,            // malformed CSV/JSON content
  Format,           // model file version/checksum problems
  Internal,         // broken invariants
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& msg) {
  throw Error(ErrorCode::InvalidArgument, msg);
}

[[noreturn]] inline void throw_io(const std::string& msg) {
  throw Error(ErrorCode::Io, msg);
}

[[noreturn]] inline void throw_parse(const std::string& msg) {
  throw Error(ErrorCode::Parse, msg);
}

[[noreturn]] inline void throw_format(const std::string& msg) {
  throw Error(ErrorCode::Format, msg);
}

}  // namespace dpart
