#pragma once

#include "macrosync/algebra.hpp"
#include "macrosync/model.hpp"
#include "macrosync/ode.hpp"

#include <optional>
#include <vector>

// Time integration of the nonlinear mean-field equations, trajectory
// recording, and the synchronization order parameter.
namespace macrosync {

struct IntegratorConfig {
  double t_final = 0.0;
  int n_samples = 0;
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double max_step = 0.1;

  /// Throws std::invalid_argument unless t_final > 0, n_samples >= 2 and the
  /// tolerances are in (0, 1e-2].
  void validate() const;
};

struct MeanFieldState {
  Matrix3 rho_a;
  Matrix3 rho_b;
};

struct TrajectoryDiagnostics {
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  bool positivity_warning = false;  // a sampled state dipped below -1e-6
};

struct Trajectory {
  std::vector<double> times;  // uniform, in units of 1/gamma_minus
  std::vector<Complex> amps_a;  // <S^+>_A per sample
  std::vector<Complex> amps_b;
  std::vector<MeanFieldState> states;  // empty unless recording was requested
  TrajectoryDiagnostics diagnostics;

  bool has_states() const { return !states.empty(); }
  double dt() const {
    return times.size() > 1 ? times[1] - times[0] : 0.0;
  }
};

enum class InitialKind { Uniform, Perturbed };

/// Reference initial states: Uniform is I/3; Perturbed is
/// I/3 + (|1><2| + |2><1|)/10.
DensityMatrix default_initial(InitialKind kind);

/// I/3 + c |1><2| + conj(c) |2><1| (Hermitized perturbed state with an
/// arbitrary complex coherence).
DensityMatrix initial_with_coherence(Complex c);

/// <S^+> of a three-level state.
Complex amplitude(const Matrix3& rho);

/// Integrates the coupled mean-field equations, sampling both amplitudes at
/// n_samples uniformly spaced times spanning [0, t_final] (endpoints
/// included). Throws StiffnessError on step-size underflow.
Trajectory integrate(const ModelParams& p, const MeanFieldState& init,
                     const IntegratorConfig& cfg, bool record_states = false);

/// Mean of |<S^+>_group| over the trailing window_fraction of samples.
double order_parameter(const Trajectory& traj, Group group,
                       double window_fraction);

/// Per-sample two-photon coherence Tr(rho |2><0|) of one group; requires a
/// trajectory recorded with full states.
std::vector<Complex> coherence_02(const Trajectory& traj, Group group);

}  // namespace macrosync
