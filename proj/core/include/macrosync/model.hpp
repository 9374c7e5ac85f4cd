#pragma once

#include "macrosync/algebra.hpp"

// The physical model: two all-to-all coupled groups of three-level limit-cycle
// oscillators. gamma_minus is the unit of rate and frequency throughout; every
// other parameter is a dimensionless ratio relative to it.
namespace macrosync {

struct ModelParams {
  double delta = 0.0;        // detuning between groups A and B
  double k = 0.0;            // level-asymmetry energy of |2>
  double v = 0.0;            // intra-group coupling
  double v_ab = 0.0;         // inter-group coupling
  double gamma_plus = 0.0;   // gain rate |0> -> |1>
  double gamma_minus = 1.0;  // loss rate |2> -> |1>, reference scale
  double omega = 0.0;        // external drive strength (microscopic model)

  /// Throws std::invalid_argument on non-finite values, gamma_plus < 0 or
  /// gamma_minus <= 0.
  void validate() const;
};

enum class Group { A, B };

/// Sign of the delta/2 S^z term: +1 for group A, -1 for group B.
inline double group_sign(Group g) { return g == Group::A ? 1.0 : -1.0; }

/// Mean-field Hamiltonian of one group. m_own and m_other are the mean
/// amplitudes <S^-> of this group and of the other group:
///   H = +-(delta/2) S^z + k |2><2| + v (S^+ m_own + h.c.)
///       + v_ab (S^+ m_other + h.c.)
Matrix3 group_hamiltonian(const ModelParams& p, Group g, Complex m_own,
                          Complex m_other);

/// Right-hand side of the coupled nonlinear mean-field master equations. The
/// mean amplitudes are evaluated self-consistently from the passed states;
/// Tr(rho S^-) and Tr(rho S^+) enter as independent traces, so the map is
/// complex-linear-quadratic in the matrix entries (exact for Hermitian states
/// and finite-difference friendly at non-Hermitian ones).
void meanfield_rhs(const ModelParams& p, const Matrix3& rho_a,
                   const Matrix3& rho_b, Matrix3& drho_a, Matrix3& drho_b);

/// Uncoupled single-site generator of one group member (coupling terms off).
Superoperator single_site_liouvillian(const ModelParams& p, Group g);

/// One oscillator coupled to a resonant external drive:
///   H = k |2><2| + omega (S^+ + S^-), with the two local dissipators.
Superoperator driven_liouvillian(const ModelParams& p);

/// Two coupled detuned oscillators on the 9-dimensional product space:
///   H = (delta/2)(S^z_A - S^z_B) + k(|2><2|_A + |2><2|_B)
///       + v_ab (S^+_A S^-_B + S^+_B S^-_A), four local dissipators.
Superoperator two_oscillator_liouvillian(const ModelParams& p);

/// Coupling part of the two-oscillator generator at unit strength,
/// -i[S^+_A S^-_B + S^+_B S^-_A, .].
Superoperator two_oscillator_coupling_liouvillian();

}  // namespace macrosync
