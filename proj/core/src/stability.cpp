#include "macrosync/stability.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>

namespace macrosync {

namespace {
constexpr Complex kI{0.0, 1.0};

// Rank-2 response block: drho -> -i[ S^+ Tr(drho S^-) + S^- Tr(drho S^+),
// |1><1| ] in vectorized form, at unit coupling strength.
CMatrix coupling_block() {
  const auto& s = spin1_operators();
  const Matrix3 fixed_point = projector(1, 1);
  const CMatrix col_p =
      vectorize(CMatrix(-kI * (s.sp * fixed_point - fixed_point * s.sp)));
  const CMatrix col_m =
      vectorize(CMatrix(-kI * (s.sm * fixed_point - fixed_point * s.sm)));
  const CMatrix row_m = vectorize(CMatrix(s.sm.transpose()));
  const CMatrix row_p = vectorize(CMatrix(s.sp.transpose()));
  return col_p * row_m.transpose() + col_m * row_p.transpose();
}

}  // namespace

CMatrix linearized_generator(const ModelParams& p) {
  p.validate();
  const CMatrix c = coupling_block();
  const CMatrix l0a = single_site_liouvillian(p, Group::A).matrix();
  const CMatrix l0b = single_site_liouvillian(p, Group::B).matrix();
  CMatrix j = CMatrix::Zero(18, 18);
  j.block(0, 0, 9, 9) = l0a + p.v * c;
  j.block(0, 9, 9, 9) = p.v_ab * c;
  j.block(9, 9, 9, 9) = l0b + p.v * c;
  j.block(9, 0, 9, 9) = p.v_ab * c;
  return j;
}

StabilityReport spectral_abscissa(const ModelParams& p) {
  const CMatrix j = linearized_generator(p);
  Eigen::ComplexEigenSolver<CMatrix> solver(j, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw EigenSolverError("spectral_abscissa: eigensolver did not converge");
  }
  const auto& values = solver.eigenvalues();

  // Rows of P^-1 are the left eigenvectors matched to the eigenvalue order.
  const CMatrix p_inv =
      solver.eigenvectors().fullPivLu().solve(CMatrix::Identity(18, 18));

  // Orthonormal trace functionals of the two blocks.
  CVector trace_a = CVector::Zero(18);
  CVector trace_b = CVector::Zero(18);
  for (int d = 0; d < 3; ++d) {
    trace_a(d * 3 + d) = 1.0;
    trace_b(9 + d * 3 + d) = 1.0;
  }
  trace_a.normalize();
  trace_b.normalize();

  StabilityReport report;
  bool have = false;
  for (int i = 0; i < 18; ++i) {
    const Complex lambda = values(i);
    if (std::abs(lambda) <= 1e-10) {
      const CVector left = p_inv.row(i).transpose();
      const double norm = left.norm();
      const double proj =
          std::hypot(std::abs(trace_a.dot(left)), std::abs(trace_b.dot(left)));
      const double overlap = norm > 0.0 ? proj / norm : 0.0;
      if (overlap > 0.99) continue;  // trace-neutral direction
      if (overlap > 0.5) {
        throw NeutralModeAmbiguityError(
            "spectral_abscissa: near-zero mode with trace overlap " +
            std::to_string(overlap));
      }
    }
    if (!have || lambda.real() > report.spectral_abscissa) {
      report.spectral_abscissa = lambda.real();
      report.leading_eigenvalue = lambda;
      have = true;
    }
  }
  if (!have) {
    throw NeutralModeAmbiguityError(
        "spectral_abscissa: all modes classified as neutral");
  }
  report.unstable = report.spectral_abscissa > 0.0;
  return report;
}

CriticalCoupling critical_coupling(const ModelParams& p, double v_max) {
  if (!(v_max > 0.0)) {
    throw std::invalid_argument("critical_coupling: v_max must be > 0");
  }
  constexpr int kScanPoints = 64;
  auto abscissa_at = [&](double v) {
    ModelParams q = p;
    q.v = v;
    return spectral_abscissa(q).spectral_abscissa;
  };

  CriticalCoupling result;
  double v_lo = 0.0, v_hi = 0.0;
  double prev_v = 0.0;
  bool prev_positive = false;
  int crossings = 0;
  for (int i = 1; i <= kScanPoints; ++i) {
    const double v = v_max * double(i) / double(kScanPoints);
    const bool positive = abscissa_at(v) > 0.0;
    if (positive != prev_positive) {
      ++crossings;
      if (crossings == 1 && positive) {
        v_lo = prev_v;
        v_hi = v;
      }
    }
    prev_positive = positive;
    prev_v = v;
  }
  result.multiple_crossings = crossings > 1;
  if (crossings == 0 || v_hi == 0.0) {
    return result;  // stable everywhere on the grid
  }

  while ((v_hi - v_lo) > 1e-4 * 0.5 * (v_hi + v_lo)) {
    const double mid = 0.5 * (v_lo + v_hi);
    if (abscissa_at(mid) > 0.0) {
      v_hi = mid;
    } else {
      v_lo = mid;
    }
  }
  result.value = 0.5 * (v_lo + v_hi);
  return result;
}

}  // namespace macrosync
