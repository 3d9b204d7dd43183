#pragma once

#include <stdexcept>
#include <string>

namespace seqnas {

enum class ErrorKind {
  Invalid,     // bad argument, bad config, illegal op placement
  Parse,       // malformed text input
  Infeasible,  // constraint P unsatisfiable, no architecture under budget
  Diverged,    // non-finite loss during training
  Io,          // file read/write failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace seqnas
