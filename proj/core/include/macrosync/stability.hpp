#pragma once

#include "macrosync/algebra.hpp"
#include "macrosync/model.hpp"

#include <optional>

// Linear stability analysis of the unsynchronized fixed point
// rho_A = rho_B = |1><1| and the critical coupling derived from it.
namespace macrosync {

struct StabilityReport {
  double spectral_abscissa = 0.0;
  Complex leading_eigenvalue{0.0, 0.0};
  bool unstable = false;
};

struct NeutralModeAmbiguityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Jacobian of the coupled mean-field flow at the fixed point, acting on the
/// stacked vectorized deviations (vec drho_A, vec drho_B); 18x18 complex.
/// Block structure: uncoupled single-site generators on the diagonal plus
/// rank-2 coupling blocks from the mean-field terms evaluated at |1><1|.
CMatrix linearized_generator(const ModelParams& p);

/// Maximum real part over eigenvalues of the linearized generator after
/// excluding the trace-neutral zero modes: eigenvalues with magnitude <= 1e-10
/// whose left eigenvector overlaps the trace functionals by more than 0.99.
/// An overlap in (0.5, 0.99] for such a mode raises
/// NeutralModeAmbiguityError.
StabilityReport spectral_abscissa(const ModelParams& p);

struct CriticalCoupling {
  std::optional<double> value;  // empty: no instability up to v_max
  bool multiple_crossings = false;
};

/// Bisection on the intra-group coupling of the sign of the spectral
/// abscissa; p.v is ignored. The initial scan uses 64 points on (0, v_max];
/// the bracket is refined to relative width 1e-4. More than one sign change
/// in the scan reports the first crossing and sets multiple_crossings.
CriticalCoupling critical_coupling(const ModelParams& p, double v_max);

}  // namespace macrosync
