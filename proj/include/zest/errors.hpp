#pragma once

#include <stdexcept>
#include <string>

namespace zest {

struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// A kernel or chain produced a non-finite or absurdly large state.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A quadrature or discretization failed its self-consistency check.
struct AccuracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejection sampler exhausted its proposal budget.
struct RejectionBudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateWeightsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScoreEstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedTargetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Too many per-particle failures to trust the run.
struct RunFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace zest
