#pragma once

#include <stdexcept>
#include <string>

namespace msacm {

/// Malformed or inconsistent user input (CSV schema, rows, config values).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. y <= 0 in a density).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameter vector outside the admissible region of the model.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every optimizer start failed to produce a finite likelihood.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Task cannot proceed because its inputs are empty or mutually inconsistent
/// (no announcements inside the sample, mismatched calendars, ...).
class TaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace msacm
