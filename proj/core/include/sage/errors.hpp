#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sage {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A measurement row with (numerically) zero norm carries no information.
class ZeroRow : public Error {
 public:
  explicit ZeroRow(std::size_t row)
      : Error("measurement row " + std::to_string(row + 1) + " has zero norm"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class InvalidCount : public Error {
 public:
  using Error::Error;
};

class InvalidSchedule : public Error {
 public:
  using Error::Error;
};

class DegenerateGraph : public Error {
 public:
  using Error::Error;
};

/// Raised when an exhaustive subset search would exceed its budget.
class TooLarge : public Error {
 public:
  using Error::Error;
};

class AllStreamsCompromised : public Error {
 public:
  using Error::Error;
};

class NotObservable : public Error {
 public:
  using Error::Error;
};

class DegenerateSeries : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  explicit NonFinite(std::uint64_t iteration)
      : Error("estimate became non-finite at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  std::uint64_t iteration() const noexcept { return iteration_; }

 private:
  std::uint64_t iteration_;
};

/// Malformed configuration, model, scenario or edge-list input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sage
