#pragma once

#include <stdexcept>
#include <string>

namespace cmc {

enum class ErrorKind {
  InvalidParameter,
  MeshQualityFailure,
  SolverFailure,
  LinearFailure,
  OutOfDomain,
  IllConditionedLoop,
  UnderflowFit,
  ConfigError,
  IoError,
};

const char* to_string(ErrorKind kind);

// All recoverable failures in the library are thrown as Error; the kind maps
// one-to-one onto the status codes of the C API.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace cmc
