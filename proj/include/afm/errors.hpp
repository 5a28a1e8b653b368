// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Exception hierarchy. Every afm error derives from afm::Error so callers
// can catch the whole family, and each failure mode keeps its own type so
// tests can assert on the precise reason.

#pragma once

#include <stdexcept>
#include <string>

namespace afm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AFM_DEFINE_ERROR(Name)       \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

// Bad call-site values: empty vectors, non-positive radii, unsorted grids.
AFM_DEFINE_ERROR(InvalidArgument);
// Incompatible shapes between layers, matrices, or sequences.
AFM_DEFINE_ERROR(DimensionMismatch);
// An estimator exhausted its search budget without meeting its target.
AFM_DEFINE_ERROR(NotResolved);
// NaN or infinity surfaced where a finite number is required.
AFM_DEFINE_ERROR(NonFinite);
// A certificate fails its own structural requirements (mu range, P shape).
AFM_DEFINE_ERROR(InvalidCertificate);
// A state Jacobian is required but the system does not provide one.
AFM_DEFINE_ERROR(MissingJacobian);
// A matrix that must be positive definite is not.
AFM_DEFINE_ERROR(NotPositiveDefinite);
// Spectral radius >= 1 where a Schur-stable matrix is required.
AFM_DEFINE_ERROR(UnstableMatrix);
// A gain condition of the form gamma * norm < 1 is violated.
AFM_DEFINE_ERROR(NormTooLarge);
// An iterative solver ran out of iterations or found no admissible point.
AFM_DEFINE_ERROR(NoConvergence);
// A declared structural assumption (slope bounds, minimality) fails.
AFM_DEFINE_ERROR(AssumptionFailed);
// Two independent computations of the same quantity disagree.
AFM_DEFINE_ERROR(CrossCheckFailed);
// A simulated trajectory leaves the ball a certificate promised it stays in.
AFM_DEFINE_ERROR(ContainmentViolated);
// Training produced non-finite parameters or a diverging loss.
AFM_DEFINE_ERROR(TrainingDiverged);
// Filter coefficients exceed their declared decay envelope.
AFM_DEFINE_ERROR(DecayViolated);
// A least-squares system is too ill-conditioned even after regularization.
AFM_DEFINE_ERROR(IllConditioned);
// Malformed experiment configuration (unknown key, missing field, bad type).
AFM_DEFINE_ERROR(ConfigInvalid);

#undef AFM_DEFINE_ERROR

}  // namespace afm
