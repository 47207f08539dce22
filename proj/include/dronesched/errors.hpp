#pragma once

#include <stdexcept>
#include <string>

namespace dronesched {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or schema-violating input text (instance, schedule, config, LP).
struct ParseError : Error {
  using Error::Error;
};

// Instance construction rejected: bad dimensions, asymmetric travel,
// out-of-range node index, or an agent that cannot reach its final node.
struct InstanceError : Error {
  using Error::Error;
};

// Schedule rejected; carries the agent and the earliest offending time step.
struct ValidationError : Error {
  int agent;
  int time;
  ValidationError(int agent_, int time_, const std::string& what_)
      : Error(what_), agent(agent_), time(time_) {}
};

// ILP model construction or evaluation rejected (mu out of bounds,
// size guard tripped, model/instance mismatch).
struct ModelError : Error {
  using Error::Error;
};

// A solver exceeded its configured state or mask budget.
struct CapacityError : Error {
  using Error::Error;
};

// A solver exceeded its configured deadline.
struct TimeoutError : Error {
  using Error::Error;
};

}  // namespace dronesched
