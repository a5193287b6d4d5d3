#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace delaynet {

using Index = std::int64_t;

/// Malformed input: bad model data, violated preconditions, bad ranges.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A stability hypothesis does not hold for the given model, so no
/// certificate can be issued.
class ConditionViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative procedure ran out of its iteration budget.
class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace delaynet
