#pragma once

#include <stdexcept>
#include <string>

namespace dkgccl {

// Malformed or inconsistent input data (files, ids, row counts).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text that could not be parsed as the expected numeric type.
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

// A function was called with arguments outside its contract.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration document rejected by schema validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values or degenerate quantities during computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A statistic that has no value for the given input (e.g. homophily of an
// isolated node, a probe trained on a single class).
class UndefinedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace dkgccl
