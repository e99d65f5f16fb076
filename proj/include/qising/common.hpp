#pragma once

#include <stdexcept>
#include <string>

namespace qising {

inline constexpr const char* kToolName = "qising";
inline constexpr const char* kToolVersion = "0.1.0";

// Tolerance for channel identity checks (CPTP, extension relations).
inline constexpr double kChannelTol = 1e-12;
// Tolerance for density-matrix validity checks (trace, hermiticity).
inline constexpr double kDensityTol = 1e-10;

// Caller error: bad arguments, invalid mode/size combination. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// A computation refused because it would exceed its configured memory budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::size_t required_bytes)
      : std::runtime_error(what), required_bytes(required_bytes) {}
  std::size_t required_bytes;
};

}  // namespace qising
