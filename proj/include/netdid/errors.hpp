// Exception taxonomy for the netdid library. The CLI maps each type to a
// distinct exit code, so estimators and IO must throw the right one:
//   InvalidInput   - caller violated a documented precondition
//   SchemaError    - malformed input file (missing column, bad value, bad ids)
//   EstimationError- data cannot support the requested estimand (no overlap,
//                    no treated units, all units isolated)
//   NumericalError - linear algebra failed beyond recovery (Cholesky after
//                    jitter escalation, singular Hessian after ridge escalation)
#pragma once

#include <stdexcept>
#include <string>

namespace netdid {

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SchemaError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace netdid
