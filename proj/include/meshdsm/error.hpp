#pragma once

#include <stdexcept>
#include <string>

namespace meshdsm {

enum class ErrorKind {
  OutOfRange,
  CapacityExceeded,
  UnmappedAddress,
  Misaligned,
  InvalidSpec,
  IndexOutOfBounds,
  InvalidPlan,
  ShapeMismatch,
  InvalidConfig,
  ParseError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace meshdsm
