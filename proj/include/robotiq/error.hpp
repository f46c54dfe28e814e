#ifndef ROBOTIQ_ERROR_HPP_
#define ROBOTIQ_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace robotiq {

enum class ErrorKind {
  kInvalidInput,
  kInvalidSpec,
  kParse,
  kInvariantViolation,
  kProtocol,
  kSetup,
  kCatalog,
  kIncompatible,
  kBackend,
  kBackendTimeout,
  kExtraction,
  kNanGuard,
  kTrainingFailure,
  kUnparseable,
  kNotFound,
  kBusy,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this type; `kind()` lets callers
// (the HTTP layer, the CLI) map failures without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace robotiq

#endif  // ROBOTIQ_ERROR_HPP_
