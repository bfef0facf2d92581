#pragma once

#include <stdexcept>

namespace bftsim {

// Invalid user-supplied parameters (topology sizes, fault counts, rates).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A closed-form expression evaluated outside the region where it converges.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Runtime failure of a simulation run, e.g. the livelock guard tripping.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal invariant was violated: engine bug, malformed graph, bad message kind.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace bftsim
