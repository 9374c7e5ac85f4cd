#include "macrosync/microscopic.hpp"

#include "macrosync/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace macrosync {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

// Charge of each level under exp(-i phi S^z): the phase of component j is
// exp(-i phi c_j) with c = (-1, 0, +1) -> component picks up e^{+i phi},
// 1, e^{-i phi} respectively.
constexpr std::array<int, 3> kCharge{+1, 0, -1};

Matrix3 rotation_y(double theta) {
  // exp(-i theta S^y) via eigendecomposition of the Hermitian S^y.
  static const Eigen::SelfAdjointEigenSolver<Matrix3> es(
      spin1_operators().sy);
  const auto& vals = es.eigenvalues();
  const Matrix3& vecs = es.eigenvectors();
  Vector3 phases;
  for (int i = 0; i < 3; ++i) {
    phases(i) = std::exp(-kI * theta * vals(i));
  }
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

// Trapezoid-in-theta overlap matrix W(j,l) = int_0^pi sin(t) conj(u_j) u_l dt
// with u(t) = exp(-i t S^y)|2>. Real symmetric for the spin-1 rotation.
// Memoized per node count; map sweeps reuse the same quadrature thousands of
// times.
Matrix3 theta_overlap(int theta_nodes) {
  if (theta_nodes < 2) {
    throw std::invalid_argument("phase distribution: need >= 2 theta nodes");
  }
  static std::mutex cache_mutex;
  static std::map<int, Matrix3> cache;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    const auto it = cache.find(theta_nodes);
    if (it != cache.end()) return it->second;
  }
  Matrix3 w = Matrix3::Zero();
  const double h = kPi / double(theta_nodes - 1);
  Vector3 top = Vector3::Zero();
  top(2) = 1.0;
  for (int k = 0; k < theta_nodes; ++k) {
    const double theta = h * double(k);
    const double weight = (k == 0 || k == theta_nodes - 1) ? 0.5 * h : h;
    const Vector3 u = rotation_y(theta) * top;
    w += (weight * std::sin(theta)) * (u.conjugate() * u.transpose());
  }
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(theta_nodes, w);
  return w;
}

// Harmonic coefficients c_n, n in [-2, 2], of the theta-reduced Husimi
// density: int sin(t) Q dt = prefactor * sum_n c_n e^{i n phi}.
std::array<Complex, 5> single_harmonics(const CMatrix& rho, const Matrix3& w) {
  std::array<Complex, 5> c{};
  for (int j = 0; j < 3; ++j) {
    for (int l = 0; l < 3; ++l) {
      const int n = kCharge[l] - kCharge[j];
      c[static_cast<std::size_t>(n + 2)] += w(j, l) * rho(j, l);
    }
  }
  return c;
}

PhaseDistribution evaluate_harmonics(const std::array<Complex, 5>& c,
                                     double prefactor, int phi_nodes) {
  if (phi_nodes < 2) {
    throw std::invalid_argument("phase distribution: need >= 2 phi nodes");
  }
  PhaseDistribution out;
  out.phis.resize(phi_nodes);
  out.values.resize(phi_nodes);
  for (int i = 0; i < phi_nodes; ++i) {
    const double phi = 2.0 * kPi * double(i) / double(phi_nodes);
    Complex acc{0.0, 0.0};
    for (int n = -2; n <= 2; ++n) {
      acc += c[static_cast<std::size_t>(n + 2)] *
             std::exp(kI * double(n) * phi);
    }
    out.phis[i] = phi;
    out.values[i] = prefactor * acc.real() - 1.0 / (2.0 * kPi);
  }
  return out;
}

}  // namespace

Vector3 spin_coherent(double theta, double phi) {
  Vector3 top = Vector3::Zero();
  top(2) = 1.0;
  Vector3 v = rotation_y(theta) * top;
  for (int j = 0; j < 3; ++j) {
    v(j) *= std::exp(kI * phi * double(kCharge[j]));
  }
  return v;
}

double husimi_q(const CMatrix& rho, double theta, double phi) {
  if (rho.rows() != 3 || rho.cols() != 3) {
    throw DimensionError("husimi_q: expected a 3x3 state");
  }
  const Vector3 v = spin_coherent(theta, phi);
  const Complex q = v.adjoint() * rho * v;
  return 3.0 / (4.0 * kPi) * q.real();
}

double PhaseDistribution::max_value() const {
  double best = values.empty() ? 0.0 : values[0];
  for (double v : values) best = std::max(best, v);
  return best;
}

double PhaseDistribution::argmax_phi() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return phis.empty() ? 0.0 : phis[best];
}

PhaseDistribution phase_distribution(const CMatrix& rho, const PhaseGrid& g) {
  if (rho.rows() != 3 || rho.cols() != 3) {
    throw DimensionError("phase_distribution: expected a 3x3 state");
  }
  const Matrix3 w = theta_overlap(g.theta_nodes);
  const auto c = single_harmonics(rho, w);
  return evaluate_harmonics(c, 3.0 / (4.0 * kPi), g.phi_nodes);
}

PhaseDistribution relative_phase_distribution(const CMatrix& rho,
                                              const PhaseGrid& g) {
  if (rho.rows() != 9 || rho.cols() != 9) {
    throw DimensionError(
        "relative_phase_distribution: expected a 9x9 two-oscillator state");
  }
  const Matrix3 w = theta_overlap(g.theta_nodes);
  // C_n = sum over A-pairs of charge n and B-pairs of charge -n of
  // W_A(j,l) W_B(k,m) rho[(j,k),(l,m)]; the phi_B integral contributes 2 pi
  // on exactly these index combinations and zero otherwise.
  std::array<Complex, 5> c{};
  for (int j = 0; j < 3; ++j) {
    for (int l = 0; l < 3; ++l) {
      const int na = kCharge[l] - kCharge[j];
      for (int k = 0; k < 3; ++k) {
        for (int m = 0; m < 3; ++m) {
          const int nb = kCharge[m] - kCharge[k];
          if (na + nb != 0) continue;
          c[static_cast<std::size_t>(na + 2)] +=
              w(j, l) * w(k, m) * rho(3 * j + k, 3 * l + m);
        }
      }
    }
  }
  const double prefactor = 9.0 / (16.0 * kPi * kPi) * 2.0 * kPi;
  return evaluate_harmonics(c, prefactor, g.phi_nodes);
}

DensityMatrix driven_steady_state(const ModelParams& p) {
  return steady_state_nullspace(driven_liouvillian(p));
}

DensityMatrix perturbative_two_oscillator_steady_state(const ModelParams& p) {
  if (p.v_ab == 0.0) {
    throw std::invalid_argument(
        "perturbative_two_oscillator_steady_state: v_ab must be nonzero");
  }
  ModelParams uncoupled = p;
  uncoupled.v_ab = 0.0;
  const CMatrix l0 = two_oscillator_liouvillian(uncoupled).matrix();
  const CMatrix l1 = two_oscillator_coupling_liouvillian().matrix();

  const CMatrix rho0 =
      tensor(CMatrix(projector(1, 1)), CMatrix(projector(1, 1)));
  const CVector b = l1 * vectorize(rho0);

  // Minimum-norm least-squares solution of L0 x = -b; orthogonality to the
  // kernel (the vectorized unperturbed steady state) makes it unique.
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(l0);
  CVector x = cod.solve(CVector(-b));
  CVector kernel = vectorize(rho0).normalized();
  x -= kernel * (kernel.adjoint() * x);

  CMatrix rho = rho0 + p.v_ab * devectorize(x, 9);
  rho = hermitized(rho);
  rho /= rho.trace();
  return DensityMatrix::unchecked(std::move(rho));
}

DensityMatrix exact_two_oscillator_steady_state(const ModelParams& p) {
  return steady_state_nullspace(two_oscillator_liouvillian(p));
}

SyncBitmap sync_bitmap(const std::vector<double>& delta_axis,
                       const std::vector<double>& k_axis,
                       const ModelParams& base, double threshold,
                       const PhaseGrid& g, int workers) {
  SyncBitmap map;
  map.delta_axis = delta_axis;
  map.k_axis = k_axis;
  const std::size_t nd = delta_axis.size();
  const std::size_t nk = k_axis.size();
  map.s_max.assign(nd * nk, 0.0);
  map.phi_max.assign(nd * nk, 0.0);
  map.synced.assign(nd * nk, 0);

  parallel_for(nd * nk, workers, [&](std::size_t cell) {
    const std::size_t ik = cell / nd;
    const std::size_t id = cell % nd;
    ModelParams p = base;
    p.delta = delta_axis[id];
    p.k = k_axis[ik];
    const DensityMatrix rho = perturbative_two_oscillator_steady_state(p);
    const PhaseDistribution s = relative_phase_distribution(rho.matrix(), g);
    const double smax = s.max_value();
    const double phimax = s.argmax_phi();
    map.s_max[cell] = smax;
    map.phi_max[cell] = phimax;
    const double dist0 = std::min(phimax, 2.0 * kPi - phimax);
    const double dist_pi = std::abs(phimax - kPi);
    map.synced[cell] = (smax > threshold && dist0 < dist_pi) ? 1 : 0;
  });
  return map;
}

}  // namespace macrosync
