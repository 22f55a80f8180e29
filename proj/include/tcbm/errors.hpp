#pragma once

#include <stdexcept>
#include <string>

namespace tcbm {

// Invalid argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical routine failed its own accuracy or convergence check.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested value lies outside an attainable range; carries the range.
class RangeError : public std::range_error {
 public:
  RangeError(const std::string& what, double lo, double hi)
      : std::range_error(what), lo_(lo), hi_(hi) {}
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

}  // namespace tcbm
