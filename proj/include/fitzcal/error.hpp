#pragma once

#include <stdexcept>
#include <string>

namespace fitzcal {

// Error families map one-to-one onto the CLI exit codes (1, 2, 3).
enum class ErrorKind { kUsage, kData, kInternal };

// All library failures are reported as fitzcal::Error. `code` is a short
// machine-parseable category such as "bad-magic" or "empty-tune-split".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

inline Error DataError(std::string code, const std::string& message) {
  return Error(ErrorKind::kData, std::move(code), message);
}

inline Error UsageError(std::string code, const std::string& message) {
  return Error(ErrorKind::kUsage, std::move(code), message);
}

inline Error InternalError(std::string code, const std::string& message) {
  return Error(ErrorKind::kInternal, std::move(code), message);
}

}  // namespace fitzcal
