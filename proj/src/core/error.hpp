#pragma once

#include <stdexcept>
#include <string>

namespace dsmc {

/// Failure categories surfaced through the C API as status codes.
enum class ErrorKind {
  InvalidArgument,
  Domain,
  Dimension,
  InvalidField,
  Config,
  Numerical,
  Io,
  Contract,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace dsmc
