#pragma once

#include <stdexcept>
#include <string>

namespace dopt {

/// Base class for every failure raised by the library. The message names the
/// component (and, for experiment runs, the pipeline stage) that failed.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed external input (dataset text, config file).
class ParseError : public Error {
 public:
  using Error::Error;
};

namespace detail {
[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw InvalidArgument(where + ": " + what);
}
inline void require(bool ok, const std::string& where, const std::string& what) {
  if (!ok) fail(where, what);
}
}  // namespace detail

}  // namespace dopt
