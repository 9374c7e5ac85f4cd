#pragma once

#include "macrosync/algebra.hpp"
#include "macrosync/dynamics.hpp"
#include "macrosync/model.hpp"

#include <array>
#include <optional>
#include <vector>

// Finite-size analysis of a single group of N identical oscillators through
// mechanically generated second-order moment equations. Basis operators are
// the projectors sigma_ab = |a><b| labelled by id = 3a + b; the trace
// constraint eliminates sigma_22 (id 8) from the stored state.
namespace macrosync {

constexpr int kFirstMoments = 8;    // sigma ids 0..7, sigma_22 eliminated
constexpr int kSecondMoments = 36;  // unordered pairs over the 8 stored ids

/// Index of the unordered pair (i, j), i <= j, i, j in 0..7.
int moment_pair_index(int i, int j);

/// First and distinct-site second moments of the permutation-symmetric
/// product state description. Diagonal first moments are real populations;
/// <sigma_ab> = conj(<sigma_ba>) and pair moments are symmetric under
/// simultaneous label/site exchange.
struct MomentState {
  std::array<Complex, kFirstMoments> first{};
  std::array<Complex, kSecondMoments> second{};

  /// Product state: first moments <sigma_ab> = rho(b, a), pair moments
  /// factorized (zero initial correlations).
  static MomentState from_density(const Matrix3& rho);

  /// Largest violation of the Hermiticity pairings among stored moments.
  double hermiticity_pairing_error() const;

  Complex amplitude() const;  // <S^+> = sqrt(2)(<sigma_21> + <sigma_10>)
};

/// Generated ODE right-hand side for the moment hierarchy truncated at
/// second order. Third-order moments across three distinct sites are closed
/// as <XY><Z> + <XZ><Y> + <YZ><X> - 2<X><Y><Z>; same-site operator products
/// reduce exactly through sigma_ab sigma_cd = delta_bc sigma_ad before any
/// closure. Site-permutation symmetry collapses the all-to-all sums into
/// multiplicities (N-1)/N, (N-2)/N and 1/N of the coupling v.
class CumulantSystem {
 public:
  /// Generates the equations for a single group (v_ab is ignored) of n
  /// oscillators, n >= 2.
  static CumulantSystem derive(const ModelParams& p, int n);

  int oscillator_count() const { return n_; }
  const ModelParams& params() const { return params_; }

  /// Full truncated rhs over the packed (first, second) state.
  void rhs(const MomentState& s, MomentState& ds) const;

  /// First-moment equations with pair moments replaced by factorized
  /// products and coupling multiplicities taken at n -> infinity; this is the
  /// mean-field limit of the hierarchy.
  void rhs_first_factorized(const std::array<Complex, kFirstMoments>& f,
                            std::array<Complex, kFirstMoments>& df) const;

 private:
  CumulantSystem() = default;

  struct FirstTerm {
    int label;  // 0..8, full basis
    Complex coeff;
  };
  struct PairTerm {
    int label_a;  // 0..8
    int label_b;  // 0..8
    Complex coeff;
  };
  struct TripleTerm {
    int x, y, z;  // 0..8 each, three distinct sites
    Complex coeff;
  };
  struct Equation {
    std::vector<FirstTerm> first_terms;
    std::vector<PairTerm> pair_terms;
    std::vector<TripleTerm> triple_terms;
  };

  // Multiplicity tags resolved when n is bound; kept separate so the
  // mean-field limit can be evaluated from the same tables.
  std::vector<Equation> first_eqs_;        // 8 equations
  std::vector<Equation> first_eqs_limit_;  // same with n -> infinity factors
  std::vector<Equation> pair_eqs_;         // 36 equations

  ModelParams params_{};
  int n_ = 0;

  void eval_equation(const Equation& eq,
                     const std::array<Complex, 9>& f,
                     const std::array<std::array<Complex, 9>, 9>& s,
                     Complex& out) const;
};

struct AmplitudeSeries {
  std::vector<double> times;
  std::vector<Complex> amps;
  std::vector<double> abs_amps;
  double max_pairing_error = 0.0;
};

/// Integrates the moment equations from the given initial state, sampling
/// <S^+> at n_samples uniform times spanning [0, t_final].
AmplitudeSeries integrate_cumulant(const CumulantSystem& sys,
                                   const MomentState& init,
                                   const IntegratorConfig& cfg);

/// Integrates the factorized (mean-field limit) first-moment equations.
AmplitudeSeries integrate_cumulant_meanfield(const CumulantSystem& sys,
                                             const MomentState& init,
                                             const IntegratorConfig& cfg);

/// First time the amplitude falls below (initial amplitude)/e and stays below
/// for 10 consecutive samples, linearly interpolated between the bracketing
/// samples. Returns nothing if the series never qualifies. Requires a
/// positive initial amplitude.
std::optional<double> lifetime(const AmplitudeSeries& series);

}  // namespace macrosync
