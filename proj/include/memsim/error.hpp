#pragma once

#include <stdexcept>
#include <string>

namespace memsim {

// Bad input: malformed config, violated precondition, unknown key. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The numerics gave up: root-find or step-size failure, divergent quadrature. Maps to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A physical model was evaluated outside its region of validity.
class NonPhysicalRegime : public NumericalError {
 public:
  NonPhysicalRegime(std::string quantity, double value)
      : NumericalError("non-physical regime: " + quantity + " = " + std::to_string(value)),
        quantity_(std::move(quantity)),
        value_(value) {}

  const std::string& quantity() const noexcept { return quantity_; }
  double value() const noexcept { return value_; }

 private:
  std::string quantity_;
  double value_;
};

}  // namespace memsim
