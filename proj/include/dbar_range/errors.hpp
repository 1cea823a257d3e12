#pragma once

#include <stdexcept>
#include <string>

namespace dbr {

enum class ErrorKind {
  Argument,   // bad input value or shape
  Domain,     // mathematical domain violation (e.g. division by a nonpositive weight)
  Query,      // geometric query outside its valid region
  Config,     // inconsistent configuration (window, mesh, parameters)
  Mesh,       // grid too coarse or too small for the requested operation
  Parse,      // malformed input document
  Solver,     // iterative method failed to converge
  Internal,   // a postcondition re-check failed
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace dbr
