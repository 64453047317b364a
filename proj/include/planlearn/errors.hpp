#pragma once

#include <stdexcept>
#include <string>

namespace planlearn {

struct eval_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct rule_conflict_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct undefined_conditional_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct parameter_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a run reaches a situation the learner's own invariants rule out.
struct internal_error : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace planlearn
