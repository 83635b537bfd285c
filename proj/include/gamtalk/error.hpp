#pragma once

#include <stdexcept>
#include <string>

namespace gamtalk {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfDomain,
  kNotFound,
  kConflict,
  kParse,
  kTransport,
  kIo,
};

// Single exception type for the library. The code drives HTTP status mapping
// in the service and exit codes in the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gamtalk
