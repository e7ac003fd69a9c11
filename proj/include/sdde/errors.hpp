#pragma once

#include <stdexcept>
#include <string>

namespace sdde {

// Argument outside the domain of a function object (e.g. segment evaluated
// past its history interval).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Caller handed us inputs that violate a documented precondition.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The model left its admissible regime mid-computation (delay escaped (0, h],
// hypothesis check failed, ...).
struct ModelViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative construction (admissible initial data, corrections) failed to
// converge.
struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A bracketing / root search could not locate what it was promised.
struct SearchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A contour passed too close to a zero, or phase tracking could not be made
// reliable at the maximum refinement depth.
struct ContourError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Root finding located fewer roots (with multiplicity) than the argument
// principle counted inside the window.
struct IncompleteSearchError : std::runtime_error {
  int found;
  int counted;
  IncompleteSearchError(int found_, int counted_)
      : std::runtime_error("root search incomplete: located " +
                           std::to_string(found_) + " of " +
                           std::to_string(counted_) + " counted roots"),
        found(found_), counted(counted_) {}
};

// Least-squares fit of the reduced field could not be carried out (window
// empty, too few usable samples, ...).
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The center projection is not defined (critical root not simple).
struct DegenerateProjection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The attraction experiment could not produce a usable rate estimate.
struct AttractionCheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace sdde
