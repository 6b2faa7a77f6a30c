#pragma once

#include <stdexcept>
#include <string>

namespace wcg {

// Error taxonomy shared by the library and the CLI exit-code mapping.
enum class ErrorKind {
  usage,      // bad arguments / invalid configuration
  io,         // filesystem failures
  format,     // malformed dataset / generator / report files
  domain,     // mathematical precondition violated
  overflow,   // matrix entries left the representable range
  collision,  // float dedup could not certify same-vs-distinct
  guard,      // resource guard refused the run
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace wcg
