#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace citescope {

using Year = std::int32_t;
using SubfieldId = std::int32_t;
using WorkIndex = std::uint32_t;

inline constexpr SubfieldId kUnlabeledSubfield = -1;

struct LookupError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative solver gave up; residual is the last measured off-diagonal norm.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, double residual_)
      : std::runtime_error(what), residual(residual_) {}
  double residual;
};

// Inclusive year interval.
struct YearRange {
  Year first = 0;
  Year last = -1;

  bool empty() const { return last < first; }
  bool contains(Year y) const { return y >= first && y <= last; }
  std::int32_t size() const { return empty() ? 0 : last - first + 1; }
  bool operator==(const YearRange&) const = default;
};

enum class BreakthroughClass { Disruptive, Consolidating };

inline const char* to_string(BreakthroughClass c) {
  return c == BreakthroughClass::Disruptive ? "DI" : "CN";
}

}  // namespace citescope
