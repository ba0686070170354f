#ifndef MIXTOBIT_ERRORS_HPP_
#define MIXTOBIT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mixtobit {

// Bad user input: malformed files, invalid configuration, violated
// preconditions. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure during an otherwise valid computation. CLI maps this
// to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

class SingularMatrixError : public NumericalError {
 public:
  explicit SingularMatrixError(const std::string& msg) : NumericalError(msg) {}
};

class ImproperPosteriorError : public NumericalError {
 public:
  explicit ImproperPosteriorError(const std::string& msg)
      : NumericalError(msg) {}
};

class EvaluationError : public NumericalError {
 public:
  explicit EvaluationError(const std::string& msg) : NumericalError(msg) {}
};

}  // namespace mixtobit

#endif  // MIXTOBIT_ERRORS_HPP_
