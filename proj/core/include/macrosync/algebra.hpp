#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Dense complex operator algebra for small Hilbert spaces (dimension 3 and 9)
// and the corresponding Liouville spaces (9 and 81). Everything here is
// value-semantic and pure; objects can be shared freely across threads.
namespace macrosync {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Matrix3 = Eigen::Matrix3cd;
using Vector3 = Eigen::Vector3cd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-8;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateSteadyStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EigenSolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Max-norm of the anti-Hermitian part, ||m - m^dag||_max.
double hermiticity_error(const CMatrix& m);

/// True if every entry is finite (no NaN/Inf).
bool all_finite(const CMatrix& m);

/// (m + m^dag)/2.
CMatrix hermitized(const CMatrix& m);

/// Spin-1 ladder and population operators in the fixed basis (|0>,|1>,|2>).
/// sz = |2><2| - |0><0|, sp = sqrt(2)(|2><1| + |1><0|), sm = sp^dag,
/// sy = i(sm - sp)/2.
struct Spin1Ops {
  Matrix3 sz;
  Matrix3 sp;
  Matrix3 sm;
  Matrix3 sy;
};

const Spin1Ops& spin1_operators();

/// |a><b| on the three-level space.
Matrix3 projector(int a, int b);

/// <O> = Tr(rho O).
Complex expectation(const CMatrix& rho, const CMatrix& op);

/// Lindblad dissipator D[o]rho = o rho o^dag - (o^dag o rho + rho o^dag o)/2.
/// The result is traceless and maps Hermitian inputs to Hermitian outputs.
CMatrix dissipator(const CMatrix& o, const CMatrix& rho);

/// Column-stacking vectorization, vec(m)[i + d*j] = m(i, j).
CVector vectorize(const CMatrix& m);
CMatrix devectorize(const CVector& v, int dim);

/// Kronecker product; the first factor (oscillator A) owns the slow index.
CMatrix tensor(const CMatrix& a, const CMatrix& b);

/// Generator of a Lindblad master equation in vectorized (column-stacking)
/// form. apply() is the action on a vectorized density matrix.
class Superoperator {
 public:
  Superoperator() = default;
  explicit Superoperator(CMatrix m);

  int hilbert_dim() const { return hdim_; }
  int dim() const { return static_cast<int>(mat_.rows()); }
  const CMatrix& matrix() const { return mat_; }

  CMatrix apply(const CMatrix& rho) const;

 private:
  CMatrix mat_;
  int hdim_ = 0;
};

/// Builds the vectorized form of rho' = -i[H, rho] + sum_k rate_k D[J_k] rho.
/// The unitary part is -i(I (x) H - H^T (x) I) in column-stacking convention.
/// Throws on mismatched dimensions or a negative rate.
Superoperator liouvillian(const CMatrix& h,
                          std::span<const std::pair<double, CMatrix>> jumps);

inline Superoperator liouvillian(const CMatrix& h) {
  return liouvillian(h, std::span<const std::pair<double, CMatrix>>{});
}

/// Eigenvalues of a general complex square matrix (Schur-based).
std::vector<Complex> eigen_spectrum(const CMatrix& m);

/// Density matrix: Hermitian, unit trace, positive semidefinite within the
/// stated tolerances. Construct through validated() at module boundaries;
/// unchecked() is for internally produced states (e.g. perturbative ones that
/// may carry small negative eigenvalues by construction).
class DensityMatrix {
 public:
  static DensityMatrix validated(CMatrix m);
  static DensityMatrix unchecked(CMatrix m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }

 private:
  explicit DensityMatrix(CMatrix m) : m_(std::move(m)) {}
  CMatrix m_;
};

/// Steady state from the one-dimensional kernel of a Liouvillian, Hermitized
/// and normalized to unit trace. Throws DegenerateSteadyStateError if the
/// kernel dimension is not one.
DensityMatrix steady_state_nullspace(const Superoperator& liouville);

}  // namespace macrosync
