#ifndef KSPM_ERRORS_HPP
#define KSPM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kspm {

/// Precondition or argument violation (bad sizes, out-of-range parameters).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A time integrator produced a non-finite value.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, std::size_t step, std::size_t cell)
      : std::runtime_error(what + " (step " + std::to_string(step) +
                           ", cell " + std::to_string(cell) + ")"),
        step_(step),
        cell_(cell) {}

  std::size_t step() const noexcept { return step_; }
  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t step_;
  std::size_t cell_;
};

/// Malformed snapshot or manifest file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kspm

#endif  // KSPM_ERRORS_HPP
