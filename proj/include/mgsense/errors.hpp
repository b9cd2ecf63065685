#pragma once

#include <stdexcept>
#include <string>

namespace mgsense {

// Invalid argument outside a function's mathematical domain.
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

// A series / continued fraction / quadrature failed to reach the requested
// tolerance. Carries the best estimate and the error bound that was achieved.
struct accuracy_error : std::runtime_error {
  accuracy_error(const std::string& what, double estimate_, double achieved_)
      : std::runtime_error(what), estimate(estimate_), achieved(achieved_) {}
  double estimate;
  double achieved;
};

// Requested a closed-form path outside its validity (non-integer Marcum order,
// non-integer mixture shape, unsupported diversity order, ...).
struct unsupported_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Intermediate value exceeds double range.
struct range_error : std::range_error {
  using std::range_error::range_error;
};

// A distribution fit missed its quality target. Carries the achieved ISE.
struct fit_quality_error : std::runtime_error {
  fit_quality_error(const std::string& what, double ise_)
      : std::runtime_error(what), ise(ise_) {}
  double ise;
};

// Zero or non-finite total mass and similar degenerate inputs.
struct degenerate_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace mgsense
