#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace swarm {

/// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A capability toggled off for the current instance was exercised.
class CapabilityDenied : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collision resolution failed to separate agents within the iteration cap.
class PhysicsFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SpecInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replay produced a state that differs from the logged one.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t tick, const std::string& what)
      : std::runtime_error(what), tick_(tick) {}
  std::int64_t tick() const noexcept { return tick_; }

 private:
  std::int64_t tick_;
};

}  // namespace swarm
