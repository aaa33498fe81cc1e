#pragma once

#include <stdexcept>
#include <string>

namespace lakeopt {

// Error taxonomy shared by the C++ core and the C API status codes.
enum class ErrorCode {
  kInvalidArgument,  // bad parameters, violated preconditions
  kIo,               // file system failures
  kSchema,           // missing/unknown columns or fields
  kParse,            // malformed cell, number, or document
  kIntegrity,        // structurally valid input violating invariants
  kLookup,           // unknown variable or factor name
  kNumeric,          // divergence, constant output, degenerate ranges
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace lakeopt
