#pragma once

#include <stdexcept>
#include <string>

namespace soliton_lab {

// A value violated the geometric domain of an operation (h <= 0, F <= 0,
// evaluation point outside a closed-form domain).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A caller-supplied parameter failed a precondition.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Reading or writing an artifact failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Something that cannot happen for well-formed input did happen.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace soliton_lab
