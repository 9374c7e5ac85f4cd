#include "macrosync/model.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace macrosync {

namespace {
constexpr Complex kI{0.0, 1.0};
}

void ModelParams::validate() const {
  const std::array<double, 7> vals{delta, k,           v,          v_ab,
                                   omega, gamma_plus,  gamma_minus};
  for (double x : vals) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("ModelParams: non-finite parameter");
    }
  }
  if (gamma_plus < 0.0) {
    throw std::invalid_argument("ModelParams: gamma_plus must be >= 0");
  }
  if (gamma_minus <= 0.0) {
    throw std::invalid_argument("ModelParams: gamma_minus must be > 0");
  }
}

Matrix3 group_hamiltonian(const ModelParams& p, Group g, Complex m_own,
                          Complex m_other) {
  const auto& s = spin1_operators();
  Matrix3 h = group_sign(g) * (p.delta / 2.0) * s.sz + p.k * projector(2, 2);
  h += p.v * (m_own * s.sp + std::conj(m_own) * s.sm);
  h += p.v_ab * (m_other * s.sp + std::conj(m_other) * s.sm);
  return h;
}

namespace {

// Local part of the mean-field flow for one group. m/mp are Tr(rho S^-) and
// Tr(rho S^+) of whichever group sources each coupling term.
inline Matrix3 group_rhs(const ModelParams& p, double dsign,
                         const Matrix3& rho, Complex m_own, Complex mp_own,
                         Complex m_other, Complex mp_other) {
  const auto& s = spin1_operators();
  Matrix3 h = dsign * (p.delta / 2.0) * s.sz;
  h(2, 2) += p.k;
  h += (p.v * m_own + p.v_ab * m_other) * s.sp;
  h += (p.v * mp_own + p.v_ab * mp_other) * s.sm;

  Matrix3 out = -kI * (h * rho - rho * h);

  // gamma_plus D[|1><0|]: feeds rho_00 into rho_11, damps row/col 0.
  out(1, 1) += p.gamma_plus * rho(0, 0);
  out.row(0) -= 0.5 * p.gamma_plus * rho.row(0);
  out.col(0) -= 0.5 * p.gamma_plus * rho.col(0);

  // gamma_minus D[|1><2|]: feeds rho_22 into rho_11, damps row/col 2.
  out(1, 1) += p.gamma_minus * rho(2, 2);
  out.row(2) -= 0.5 * p.gamma_minus * rho.row(2);
  out.col(2) -= 0.5 * p.gamma_minus * rho.col(2);
  return out;
}

}  // namespace

void meanfield_rhs(const ModelParams& p, const Matrix3& rho_a,
                   const Matrix3& rho_b, Matrix3& drho_a, Matrix3& drho_b) {
  // Tr(rho S^-) = sqrt(2)(rho_10 + rho_21), Tr(rho S^+) = sqrt(2)(rho_01 + rho_12).
  const double r2 = std::numbers::sqrt2;
  const Complex ma = r2 * (rho_a(1, 0) + rho_a(2, 1));
  const Complex mpa = r2 * (rho_a(0, 1) + rho_a(1, 2));
  const Complex mb = r2 * (rho_b(1, 0) + rho_b(2, 1));
  const Complex mpb = r2 * (rho_b(0, 1) + rho_b(1, 2));
  drho_a = group_rhs(p, +1.0, rho_a, ma, mpa, mb, mpb);
  drho_b = group_rhs(p, -1.0, rho_b, mb, mpb, ma, mpa);
}

Superoperator single_site_liouvillian(const ModelParams& p, Group g) {
  const auto& s = spin1_operators();
  const CMatrix h =
      group_sign(g) * (p.delta / 2.0) * s.sz + p.k * projector(2, 2);
  const std::vector<std::pair<double, CMatrix>> jumps{
      {p.gamma_plus, projector(1, 0)}, {p.gamma_minus, projector(1, 2)}};
  return liouvillian(h, jumps);
}

Superoperator driven_liouvillian(const ModelParams& p) {
  const auto& s = spin1_operators();
  const CMatrix h = p.k * projector(2, 2) + p.omega * (s.sp + s.sm);
  const std::vector<std::pair<double, CMatrix>> jumps{
      {p.gamma_plus, projector(1, 0)}, {p.gamma_minus, projector(1, 2)}};
  return liouvillian(h, jumps);
}

Superoperator two_oscillator_liouvillian(const ModelParams& p) {
  const auto& s = spin1_operators();
  const CMatrix id = CMatrix::Identity(3, 3);
  const CMatrix p22 = projector(2, 2);
  CMatrix h = (p.delta / 2.0) * (tensor(s.sz, id) - tensor(id, s.sz));
  h += p.k * (tensor(p22, id) + tensor(id, p22));
  h += p.v_ab * (tensor(s.sp, s.sm) + tensor(s.sm, s.sp));
  const CMatrix j10 = projector(1, 0);
  const CMatrix j12 = projector(1, 2);
  const std::vector<std::pair<double, CMatrix>> jumps{
      {p.gamma_plus, tensor(j10, id)},
      {p.gamma_plus, tensor(id, j10)},
      {p.gamma_minus, tensor(j12, id)},
      {p.gamma_minus, tensor(id, j12)}};
  return liouvillian(h, jumps);
}

Superoperator two_oscillator_coupling_liouvillian() {
  const auto& s = spin1_operators();
  const CMatrix h = tensor(s.sp, s.sm) + tensor(s.sm, s.sp);
  return liouvillian(h);
}

}  // namespace macrosync
