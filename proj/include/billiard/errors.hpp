#pragma once

#include <stdexcept>
#include <string>

namespace billiard {

/// Base class of every error raised by the library.
class BilliardError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define BILLIARD_DEFINE_ERROR(Name)                                            \
  class Name : public BilliardError {                                          \
  public:                                                                      \
    explicit Name(const std::string& what) : BilliardError(#Name ": " + what) {} \
  }

// domain_geometry
BILLIARD_DEFINE_ERROR(NonConvex);
BILLIARD_DEFINE_ERROR(NotClosed);
BILLIARD_DEFINE_ERROR(BadAxisRatio);

// billiard_map
BILLIARD_DEFINE_ERROR(DegenerateChord);
BILLIARD_DEFINE_ERROR(SolverFailure);

// mather_orbits
BILLIARD_DEFINE_ERROR(NoConvergence);
BILLIARD_DEFINE_ERROR(OrderViolation);
BILLIARD_DEFINE_ERROR(NotIrrational);
BILLIARD_DEFINE_ERROR(IllConditioned);

// series_algebra
BILLIARD_DEFINE_ERROR(OrderMismatch);
BILLIARD_DEFINE_ERROR(NotNearIdentity);
BILLIARD_DEFINE_ERROR(HasConstantTerm);
BILLIARD_DEFINE_ERROR(BadLeadingCoefficient);

// birkhoff_normalform / beta_spectrum
BILLIARD_DEFINE_ERROR(ConstraintViolation);
BILLIARD_DEFINE_ERROR(SeedOrderExceeded);
BILLIARD_DEFINE_ERROR(OrderExceeded);

// cli
BILLIARD_DEFINE_ERROR(ConfigError);

#undef BILLIARD_DEFINE_ERROR

} // namespace billiard
