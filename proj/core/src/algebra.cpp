#include "macrosync/algebra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace macrosync {

namespace {
constexpr Complex kI{0.0, 1.0};
}

double hermiticity_error(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool all_finite(const CMatrix& m) {
  return m.allFinite();
}

CMatrix hermitized(const CMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

const Spin1Ops& spin1_operators() {
  static const Spin1Ops ops = [] {
    Spin1Ops o;
    o.sz.setZero();
    o.sz(2, 2) = 1.0;
    o.sz(0, 0) = -1.0;
    o.sp.setZero();
    const double r2 = std::sqrt(2.0);
    o.sp(2, 1) = r2;
    o.sp(1, 0) = r2;
    o.sm = o.sp.adjoint();
    o.sy = kI * (o.sm - o.sp) / 2.0;
    return o;
  }();
  return ops;
}

Matrix3 projector(int a, int b) {
  Matrix3 m = Matrix3::Zero();
  m(a, b) = 1.0;
  return m;
}

Complex expectation(const CMatrix& rho, const CMatrix& op) {
  return (rho * op).trace();
}

CMatrix dissipator(const CMatrix& o, const CMatrix& rho) {
  if (o.rows() != o.cols() || rho.rows() != rho.cols() ||
      o.rows() != rho.rows()) {
    throw DimensionError("dissipator: operator and state dimensions differ");
  }
  const CMatrix odo = o.adjoint() * o;
  return o * rho * o.adjoint() - 0.5 * (odo * rho + rho * odo);
}

CVector vectorize(const CMatrix& m) {
  const int d = static_cast<int>(m.rows());
  CVector v(d * d);
  for (int j = 0; j < d; ++j) {
    v.segment(j * d, d) = m.col(j);
  }
  return v;
}

CMatrix devectorize(const CVector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw DimensionError("devectorize: vector length is not dim^2");
  }
  CMatrix m(dim, dim);
  for (int j = 0; j < dim; ++j) {
    m.col(j) = v.segment(j * dim, dim);
  }
  return m;
}

CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  const Eigen::Index ar = a.rows(), ac = a.cols();
  const Eigen::Index br = b.rows(), bc = b.cols();
  CMatrix out(ar * br, ac * bc);
  for (Eigen::Index i = 0; i < ar; ++i) {
    for (Eigen::Index j = 0; j < ac; ++j) {
      out.block(i * br, j * bc, br, bc) = a(i, j) * b;
    }
  }
  return out;
}

Superoperator::Superoperator(CMatrix m) : mat_(std::move(m)) {
  if (mat_.rows() != mat_.cols()) {
    throw DimensionError("Superoperator: matrix must be square");
  }
  hdim_ = static_cast<int>(std::lround(std::sqrt(double(mat_.rows()))));
  if (static_cast<Eigen::Index>(hdim_) * hdim_ != mat_.rows()) {
    throw DimensionError("Superoperator: dimension is not a perfect square");
  }
}

CMatrix Superoperator::apply(const CMatrix& rho) const {
  if (rho.rows() != hdim_ || rho.cols() != hdim_) {
    throw DimensionError("Superoperator::apply: state dimension mismatch");
  }
  return devectorize(mat_ * vectorize(rho), hdim_);
}

Superoperator liouvillian(const CMatrix& h,
                          std::span<const std::pair<double, CMatrix>> jumps) {
  if (h.rows() != h.cols()) {
    throw DimensionError("liouvillian: Hamiltonian must be square");
  }
  const Eigen::Index d = h.rows();
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix l = -kI * (tensor(id, h) - tensor(h.transpose(), id));
  for (const auto& [rate, j] : jumps) {
    if (rate < 0.0) {
      throw std::invalid_argument("liouvillian: negative jump rate");
    }
    if (j.rows() != d || j.cols() != d) {
      throw DimensionError("liouvillian: jump operator dimension mismatch");
    }
    const CMatrix jdj = j.adjoint() * j;
    l += rate * (tensor(j.conjugate(), j) - 0.5 * tensor(id, jdj) -
                 0.5 * tensor(jdj.transpose(), id));
  }
  return Superoperator(std::move(l));
}

std::vector<Complex> eigen_spectrum(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("eigen_spectrum: matrix must be square");
  }
  Eigen::ComplexEigenSolver<CMatrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw EigenSolverError("eigen_spectrum: eigensolver did not converge");
  }
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

DensityMatrix DensityMatrix::validated(CMatrix m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("DensityMatrix: matrix must be square");
  }
  if (!all_finite(m)) {
    throw std::invalid_argument("DensityMatrix: non-finite entries");
  }
  if (hermiticity_error(m) > kHermitianTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  }
  if (std::abs(m.trace() - Complex(1.0, 0.0)) > kTraceTol) {
    throw std::invalid_argument("DensityMatrix: trace differs from one");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitized(m),
                                            Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPositivityTol) {
    throw std::invalid_argument("DensityMatrix: not positive semidefinite");
  }
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::unchecked(CMatrix m) {
  return DensityMatrix(std::move(m));
}

DensityMatrix steady_state_nullspace(const Superoperator& liouville) {
  const CMatrix& l = liouville.matrix();
  Eigen::JacobiSVD<CMatrix> svd(l, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double tol = 1e-10 * std::max(smax, 1.0);
  int kernel_dim = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= tol) ++kernel_dim;
  }
  if (kernel_dim != 1) {
    throw DegenerateSteadyStateError(
        "steady_state_nullspace: kernel dimension is " +
        std::to_string(kernel_dim) + ", expected 1");
  }
  const int d = liouville.hilbert_dim();
  CMatrix rho = devectorize(svd.matrixV().col(sv.size() - 1), d);
  rho = hermitized(rho);
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-12) {
    throw DegenerateSteadyStateError(
        "steady_state_nullspace: kernel vector is traceless");
  }
  rho /= tr;
  return DensityMatrix::unchecked(std::move(rho));
}

}  // namespace macrosync
