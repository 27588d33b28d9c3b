#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace caplab {

/// A size guard refused to build something. Carries the guard name and the
/// offending size so callers can report both.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(std::string guard, double estimate, double limit);

  const std::string& guard() const noexcept { return guard_; }
  double estimate() const noexcept { return estimate_; }
  double limit() const noexcept { return limit_; }

 private:
  std::string guard_;
  double estimate_;
  double limit_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& what);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Precision exhaustion or a non-finite value showed up in an iteration.
class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace caplab
