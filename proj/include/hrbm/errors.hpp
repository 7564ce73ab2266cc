#pragma once

#include <stdexcept>
#include <string>

namespace hrbm {

// Bad user input: invalid parameters, malformed files, impossible plans.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed to reach its tolerance. Carries the achieved
// error estimate so callers can decide whether it is still usable.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double achieved_error)
      : std::runtime_error(what), achieved_error_(achieved_error) {}

  [[nodiscard]] double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

}  // namespace hrbm
