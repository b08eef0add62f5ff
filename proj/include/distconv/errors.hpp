#pragma once

#include <stdexcept>
#include <string>

namespace distconv {

// Bad input: schema, codes, config, preconditions. CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A fit or estimand could not be computed from otherwise valid input.
// CLI exit code 3.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace distconv
