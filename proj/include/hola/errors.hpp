#pragma once

#include <stdexcept>
#include <string>

namespace hola {

struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnsupportedOperation : std::logic_error {
  using std::logic_error::logic_error;
};

struct NotPsdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a chain produces a non-finite state. Carries the outer step
// index and, when known, the collocation node at which the blow-up appeared.
struct DivergenceError : std::runtime_error {
  long step;
  int node;
  DivergenceError(long step_, int node_, const std::string& what_)
      : std::runtime_error(what_), step(step_), node(node_) {}
};

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hola
