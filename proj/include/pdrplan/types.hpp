#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pdr {

/// Task identifier, dense in 1..n.
using TaskId = int;

/// Time in integer nanoseconds. Every schedule quantity is a sum of these,
/// so comparisons between independently assembled path lengths are exact.
using Ticks = std::int64_t;

inline constexpr double kTicksPerMs = 1e6;

inline Ticks ms_to_ticks(double ms) { return static_cast<Ticks>(std::llround(ms * kTicksPerMs)); }
inline double ticks_to_ms(Ticks t) { return static_cast<double>(t) / kTicksPerMs; }

/// Base of all library errors. `category()` is a short machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}
  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

/// The problem instance itself is malformed (cycle, bad ids, bad dimensions).
class InstanceError : public Error {
 public:
  explicit InstanceError(const std::string& what) : Error("instance", what) {}
};

/// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error("contract", what) {}
};

/// Partition + configuration order admits no schedule.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error("infeasible", what) {}
};

/// A benchmark / solution / config file does not match its schema.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error("schema", what) {}
};

/// A brute-force oracle hit its enumeration budget.
class OracleAbort : public Error {
 public:
  explicit OracleAbort(const std::string& what) : Error("oracle", what) {}
};

}  // namespace pdr
