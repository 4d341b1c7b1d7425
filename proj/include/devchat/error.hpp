#pragma once

#include <stdexcept>
#include <string>

namespace devchat {

// Bad input: malformed files, violated preconditions, missing upstream
// artifacts. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The completion backend could not be reached or kept failing after
// retries. The CLI maps these to exit code 2.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace devchat
