#include "macrosync/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace macrosync {

void IntegratorConfig::validate() const {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("IntegratorConfig: t_final must be > 0");
  }
  if (n_samples < 2) {
    throw std::invalid_argument("IntegratorConfig: n_samples must be >= 2");
  }
  for (double tol : {rel_tol, abs_tol}) {
    if (!(tol > 0.0) || tol > 1e-2) {
      throw std::invalid_argument(
          "IntegratorConfig: tolerances must lie in (0, 1e-2]");
    }
  }
  if (!(max_step > 0.0)) {
    throw std::invalid_argument("IntegratorConfig: max_step must be > 0");
  }
}

DensityMatrix default_initial(InitialKind kind) {
  if (kind == InitialKind::Uniform) {
    return DensityMatrix::validated(CMatrix::Identity(3, 3) / 3.0);
  }
  return initial_with_coherence(Complex(0.1, 0.0));
}

DensityMatrix initial_with_coherence(Complex c) {
  CMatrix rho = CMatrix::Identity(3, 3) / 3.0;
  rho(1, 2) += c;
  rho(2, 1) += std::conj(c);
  return DensityMatrix::validated(std::move(rho));
}

Complex amplitude(const Matrix3& rho) {
  return std::numbers::sqrt2 * (rho(0, 1) + rho(1, 2));
}

namespace {

using StateVec = Eigen::Matrix<double, 36, 1>;

inline void unpack(const StateVec& y, Matrix3& a, Matrix3& b) {
  a = Eigen::Map<const Matrix3>(
      reinterpret_cast<const Complex*>(y.data()));
  b = Eigen::Map<const Matrix3>(
      reinterpret_cast<const Complex*>(y.data()) + 9);
}

inline void pack(const Matrix3& a, const Matrix3& b, StateVec& y) {
  Eigen::Map<Matrix3>(reinterpret_cast<Complex*>(y.data())) = a;
  Eigen::Map<Matrix3>(reinterpret_cast<Complex*>(y.data()) + 9) = b;
}

}  // namespace

Trajectory integrate(const ModelParams& p, const MeanFieldState& init,
                     const IntegratorConfig& cfg, bool record_states) {
  p.validate();
  cfg.validate();

  const int n = cfg.n_samples;
  std::vector<double> times(n);
  for (int i = 0; i < n; ++i) {
    times[i] = cfg.t_final * double(i) / double(n - 1);
  }

  Trajectory traj;
  traj.times = times;
  traj.amps_a.resize(n);
  traj.amps_b.resize(n);
  if (record_states) traj.states.resize(n);
  traj.diagnostics.min_eigenvalue = 1.0;

  StateVec y;
  pack(init.rho_a, init.rho_b, y);

  OdeOptions opt{cfg.rel_tol, cfg.abs_tol, cfg.max_step};
  Matrix3 ra, rb, da, db;
  auto rhs = [&](double, const StateVec& yv, StateVec& dyv) {
    unpack(yv, ra, rb);
    meanfield_rhs(p, ra, rb, da, db);
    pack(da, db, dyv);
  };

  Eigen::SelfAdjointEigenSolver<Matrix3> es;
  auto on_sample = [&](std::size_t idx, double, const StateVec& yv) {
    unpack(yv, ra, rb);
    traj.amps_a[idx] = amplitude(ra);
    traj.amps_b[idx] = amplitude(rb);
    if (record_states) traj.states[idx] = MeanFieldState{ra, rb};
    auto& diag = traj.diagnostics;
    for (const Matrix3* rho : {&ra, &rb}) {
      diag.max_trace_error = std::max(
          diag.max_trace_error, std::abs(rho->trace() - Complex(1.0, 0.0)));
      diag.max_hermiticity_error =
          std::max(diag.max_hermiticity_error,
                   (*rho - rho->adjoint()).cwiseAbs().maxCoeff());
      es.computeDirect(Matrix3(0.5 * (*rho + rho->adjoint())),
                       Eigen::EigenvaluesOnly);
      diag.min_eigenvalue =
          std::min(diag.min_eigenvalue, es.eigenvalues().minCoeff());
    }
  };

  integrate_rk45(rhs, y, 0.0, std::span<const double>(times), opt, on_sample);
  traj.diagnostics.positivity_warning = traj.diagnostics.min_eigenvalue < -1e-6;
  return traj;
}

double order_parameter(const Trajectory& traj, Group group,
                       double window_fraction) {
  if (!(window_fraction > 0.0) || window_fraction > 1.0) {
    throw std::invalid_argument(
        "order_parameter: window_fraction must lie in (0, 1]");
  }
  const auto& amps = group == Group::A ? traj.amps_a : traj.amps_b;
  const std::size_t n = amps.size();
  const std::size_t count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(window_fraction * double(n))));
  if (count == 0 || n == 0) {
    throw std::invalid_argument("order_parameter: empty window");
  }
  double acc = 0.0;
  for (std::size_t i = n - count; i < n; ++i) acc += std::abs(amps[i]);
  return acc / double(count);
}

std::vector<Complex> coherence_02(const Trajectory& traj, Group group) {
  if (!traj.has_states()) {
    throw std::invalid_argument(
        "coherence_02: trajectory was recorded without states");
  }
  std::vector<Complex> out(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const Matrix3& rho =
        group == Group::A ? traj.states[i].rho_a : traj.states[i].rho_b;
    out[i] = rho(0, 2);  // Tr(rho |2><0|)
  }
  return out;
}

}  // namespace macrosync
