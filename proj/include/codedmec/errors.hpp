// include/codedmec/errors.hpp
//
// Exception types shared across the library. The CLI maps them to exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace codedmec {

/// A scenario or configuration violates one of its invariants.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// An exhaustive routine was asked to run on an instance above its size budget.
class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A deadline-infeasible (device, task) pair was asked to compute locally.
class DeadlineError : public std::domain_error {
 public:
  DeadlineError(std::size_t device, std::size_t task)
      : std::domain_error("deadline violation: device " + std::to_string(device) + " cannot compute task " +
                          std::to_string(task) + " within the slot"),
        device_(device),
        task_(task) {}

  std::size_t device() const noexcept { return device_; }
  std::size_t task() const noexcept { return task_; }

 private:
  std::size_t device_;
  std::size_t task_;
};

/// XOR peeling could not cancel an interfering subfile.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The active-set QP solver hit its iteration limit or found no feasible point.
class QpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace codedmec
