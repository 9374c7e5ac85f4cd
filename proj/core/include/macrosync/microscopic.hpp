#pragma once

#include "macrosync/algebra.hpp"
#include "macrosync/model.hpp"

#include <vector>

// Single- and two-oscillator steady-state analysis: Husimi-Q functions,
// phase distributions over spin-coherent states, the perturbative steady
// state of two coupled oscillators, and the resonance bitmap classifier.
namespace macrosync {

/// Spin-coherent state |theta, phi> = exp(-i phi S^z) exp(-i theta S^y) |2>.
Vector3 spin_coherent(double theta, double phi);

/// Husimi-Q value Q(theta, phi) = (3 / 4 pi) <theta,phi| rho |theta,phi>.
double husimi_q(const CMatrix& rho, double theta, double phi);

/// Angular density on a uniform phi grid with the uniform background 1/(2 pi)
/// subtracted; integral of (values + 1/2pi) over the grid is one up to
/// quadrature error.
struct PhaseDistribution {
  std::vector<double> phis;
  std::vector<double> values;

  double max_value() const;
  /// Phase of the maximum; grid argmax, ties toward smaller phi.
  double argmax_phi() const;
};

struct PhaseGrid {
  int theta_nodes = 4096;  // composite trapezoid nodes on [0, pi]
  int phi_nodes = 256;     // output grid on [0, 2 pi)
};

/// s(phi) = integral_0^pi sin(theta) Q(theta, phi) dtheta - 1/(2 pi) for a
/// three-level state. The theta integral uses a composite trapezoid rule; the
/// phi dependence of the integrand is a second-order trigonometric polynomial
/// and is carried exactly.
PhaseDistribution phase_distribution(const CMatrix& rho, const PhaseGrid& g);

/// Distribution of the relative phase phi_AB of a two-oscillator state
/// (9x9, A-first ordering). Reduces the four-angle integral with the delta
/// constraint phi_A = phi_AB + phi_B; the phi_B integral of the trigonometric
/// integrand is exact (uniform-trapezoid limit), the two theta integrals use
/// the composite trapezoid rule. Two-oscillator Husimi prefactor 9/(16 pi^2).
PhaseDistribution relative_phase_distribution(const CMatrix& rho,
                                              const PhaseGrid& g);

/// Steady state of the driven single oscillator (kernel of the driven
/// generator).
DensityMatrix driven_steady_state(const ModelParams& p);

/// First-order perturbative steady state of the two-oscillator master
/// equation in the inter-group coupling: rho0 + v_ab * rho1 with
/// L0 rho1 = -L1 rho0 solved in the complement of the kernel of L0,
/// Hermitized and trace-normalized. The result may carry O(v_ab^2) negative
/// eigenvalues; it is not re-validated.
DensityMatrix perturbative_two_oscillator_steady_state(const ModelParams& p);

/// Exact steady state of the full two-oscillator generator (nullspace).
DensityMatrix exact_two_oscillator_steady_state(const ModelParams& p);

struct SyncBitmap {
  std::vector<double> delta_axis;
  std::vector<double> k_axis;
  // Row-major [k_index * delta_count + delta_index].
  std::vector<double> s_max;
  std::vector<double> phi_max;
  std::vector<std::uint8_t> synced;
};

/// Classifies each (delta, k) cell of the perturbative two-oscillator steady
/// state: synced iff max_phi s(phi_AB) > threshold and the argmax phase is
/// closer to 0 than to pi (distances mod 2 pi).
SyncBitmap sync_bitmap(const std::vector<double>& delta_axis,
                       const std::vector<double>& k_axis,
                       const ModelParams& base, double threshold,
                       const PhaseGrid& g, int workers = 0);

}  // namespace macrosync
