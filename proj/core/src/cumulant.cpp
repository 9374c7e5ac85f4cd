#include "macrosync/cumulant.hpp"

#include "macrosync/ode.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

namespace macrosync {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kDropTol = 1e-14;

inline int label_of(int a, int b) { return 3 * a + b; }

std::vector<std::pair<int, Complex>> decompose(const Matrix3& m) {
  std::vector<std::pair<int, Complex>> out;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (std::abs(m(a, b)) > kDropTol) {
        out.emplace_back(label_of(a, b), m(a, b));
      }
    }
  }
  return out;
}

}  // namespace

int moment_pair_index(int i, int j) {
  if (i > j) std::swap(i, j);
  // Row i of the upper triangle starts after rows 0..i-1 of lengths 8-r.
  return i * kFirstMoments - i * (i - 1) / 2 + (j - i);
}

MomentState MomentState::from_density(const Matrix3& rho) {
  MomentState s;
  std::array<Complex, 9> f{};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      f[static_cast<std::size_t>(label_of(a, b))] = rho(b, a);  // <|a><b|>
    }
  }
  for (int k = 0; k < kFirstMoments; ++k) {
    s.first[static_cast<std::size_t>(k)] = f[static_cast<std::size_t>(k)];
  }
  for (int i = 0; i < kFirstMoments; ++i) {
    for (int j = i; j < kFirstMoments; ++j) {
      s.second[static_cast<std::size_t>(moment_pair_index(i, j))] =
          f[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(j)];
    }
  }
  return s;
}

double MomentState::hermiticity_pairing_error() const {
  auto transpose_id = [](int k) { return 3 * (k % 3) + k / 3; };
  double err = 0.0;
  for (int k = 0; k < kFirstMoments; ++k) {
    const int kt = transpose_id(k);
    if (kt >= kFirstMoments) continue;
    err = std::max(err,
                   std::abs(first[static_cast<std::size_t>(k)] -
                            std::conj(first[static_cast<std::size_t>(kt)])));
  }
  for (int i = 0; i < kFirstMoments; ++i) {
    for (int j = i; j < kFirstMoments; ++j) {
      const int it = transpose_id(i);
      const int jt = transpose_id(j);
      if (it >= kFirstMoments || jt >= kFirstMoments) continue;
      err = std::max(
          err,
          std::abs(
              second[static_cast<std::size_t>(moment_pair_index(i, j))] -
              std::conj(second[static_cast<std::size_t>(
                  moment_pair_index(it, jt))])));
    }
  }
  return err;
}

Complex MomentState::amplitude() const {
  return std::numbers::sqrt2 *
         (first[static_cast<std::size_t>(label_of(2, 1))] +
          first[static_cast<std::size_t>(label_of(1, 0))]);
}

namespace {

// Accumulators used while generating one equation; compacted into the sparse
// term lists afterwards.
struct EquationBuilder {
  std::array<Complex, 9> first{};
  std::array<std::array<Complex, 9>, 9> pair{};
  std::map<std::tuple<int, int, int>, Complex> triple;

  void add_first(const Matrix3& m, Complex c) {
    for (const auto& [label, val] : decompose(m)) {
      first[static_cast<std::size_t>(label)] += c * val;
    }
  }
  void add_pair(const Matrix3& ma, const Matrix3& mb, Complex c) {
    for (const auto& [la, va] : decompose(ma)) {
      for (const auto& [lb, vb] : decompose(mb)) {
        pair[static_cast<std::size_t>(la)][static_cast<std::size_t>(lb)] +=
            c * va * vb;
      }
    }
  }
  void add_triple(const Matrix3& ma, const Matrix3& mb, const Matrix3& mc,
                  Complex c) {
    for (const auto& [la, va] : decompose(ma)) {
      for (const auto& [lb, vb] : decompose(mb)) {
        for (const auto& [lc, vc] : decompose(mc)) {
          // The closure expression is symmetric in its three operators.
          std::array<int, 3> key{la, lb, lc};
          std::sort(key.begin(), key.end());
          triple[{key[0], key[1], key[2]}] += c * va * vb * vc;
        }
      }
    }
  }
};

Matrix3 basis_op(int label) {
  Matrix3 m = Matrix3::Zero();
  m(label / 3, label % 3) = 1.0;
  return m;
}

// Adjoint single-site dissipator action, J^dag T J - (J^dag J T + T J^dag J)/2.
Matrix3 adjoint_dissipator(const Matrix3& j, const Matrix3& t) {
  const Matrix3 jdj = j.adjoint() * j;
  return j.adjoint() * t * j - 0.5 * (jdj * t + t * jdj);
}

struct CouplingWeights {
  double external_first;  // v (N-1)/N on first-moment equations
  double direct_pair;     // v / N between the two stored legs
  double external_pair;   // v (N-2)/N from third sites
};

}  // namespace

CumulantSystem CumulantSystem::derive(const ModelParams& p, int n) {
  p.validate();
  if (n < 2) {
    throw std::invalid_argument("CumulantSystem: need at least 2 oscillators");
  }
  CumulantSystem sys;
  sys.params_ = p;
  sys.n_ = n;

  const auto& s1 = spin1_operators();
  const Matrix3 h_local =
      (p.delta / 2.0) * s1.sz + p.k * Matrix3(projector(2, 2));
  const std::array<std::pair<double, Matrix3>, 2> jumps{
      std::pair<double, Matrix3>{p.gamma_plus, projector(1, 0)},
      std::pair<double, Matrix3>{p.gamma_minus, projector(1, 2)}};

  const double nn = double(n);
  const CouplingWeights bound{p.v * (nn - 1.0) / nn, p.v / nn,
                              p.v * (nn - 2.0) / nn};
  const CouplingWeights limit{p.v, 0.0, p.v};

  auto build_first = [&](int k, const CouplingWeights& w) {
    EquationBuilder eb;
    const Matrix3 t = basis_op(k);
    // i [h, T] and the local dissipators.
    eb.add_first(Matrix3(kI * (h_local * t - t * h_local)), 1.0);
    for (const auto& [rate, j] : jumps) {
      if (rate != 0.0) eb.add_first(adjoint_dissipator(j, t), rate);
    }
    // Coupling to the other N-1 sites.
    if (w.external_first != 0.0) {
      eb.add_pair(Matrix3(s1.sp * t - t * s1.sp), s1.sm,
                  kI * w.external_first);
      eb.add_pair(Matrix3(s1.sm * t - t * s1.sm), s1.sp,
                  kI * w.external_first);
    }
    return eb;
  };

  auto build_pair = [&](int ka, int kb, const CouplingWeights& w) {
    EquationBuilder eb;
    const Matrix3 t = basis_op(ka);
    const Matrix3 u = basis_op(kb);
    // Local Hamiltonian and dissipators on each leg.
    eb.add_pair(Matrix3(kI * (h_local * t - t * h_local)), u, 1.0);
    eb.add_pair(t, Matrix3(kI * (h_local * u - u * h_local)), 1.0);
    for (const auto& [rate, j] : jumps) {
      if (rate == 0.0) continue;
      eb.add_pair(adjoint_dissipator(j, t), u, rate);
      eb.add_pair(t, adjoint_dissipator(j, u), rate);
    }
    // Direct exchange between the two stored legs.
    if (w.direct_pair != 0.0) {
      const Complex c = kI * w.direct_pair;
      eb.add_pair(Matrix3(s1.sp * t), Matrix3(s1.sm * u), c);
      eb.add_pair(Matrix3(t * s1.sp), Matrix3(u * s1.sm), -c);
      eb.add_pair(Matrix3(s1.sm * t), Matrix3(s1.sp * u), c);
      eb.add_pair(Matrix3(t * s1.sm), Matrix3(u * s1.sp), -c);
    }
    // Exchange with the N-2 remaining sites: genuine three-site moments.
    if (w.external_pair != 0.0) {
      const Complex c = kI * w.external_pair;
      eb.add_triple(Matrix3(s1.sp * t - t * s1.sp), u, s1.sm, c);
      eb.add_triple(Matrix3(s1.sm * t - t * s1.sm), u, s1.sp, c);
      eb.add_triple(t, Matrix3(s1.sp * u - u * s1.sp), s1.sm, c);
      eb.add_triple(t, Matrix3(s1.sm * u - u * s1.sm), s1.sp, c);
    }
    return eb;
  };

  auto compact = [](const EquationBuilder& eb) {
    Equation eq;
    for (int l = 0; l < 9; ++l) {
      const Complex c = eb.first[static_cast<std::size_t>(l)];
      if (std::abs(c) > kDropTol) eq.first_terms.push_back({l, c});
    }
    for (int a = 0; a < 9; ++a) {
      for (int b = 0; b < 9; ++b) {
        const Complex c =
            eb.pair[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        if (std::abs(c) > kDropTol) eq.pair_terms.push_back({a, b, c});
      }
    }
    for (const auto& [key, c] : eb.triple) {
      if (std::abs(c) > kDropTol) {
        eq.triple_terms.push_back(
            {std::get<0>(key), std::get<1>(key), std::get<2>(key), c});
      }
    }
    return eq;
  };

  sys.first_eqs_.reserve(kFirstMoments);
  sys.first_eqs_limit_.reserve(kFirstMoments);
  for (int k = 0; k < kFirstMoments; ++k) {
    sys.first_eqs_.push_back(compact(build_first(k, bound)));
    sys.first_eqs_limit_.push_back(compact(build_first(k, limit)));
  }
  sys.pair_eqs_.reserve(kSecondMoments);
  for (int i = 0; i < kFirstMoments; ++i) {
    for (int j = i; j < kFirstMoments; ++j) {
      sys.pair_eqs_.push_back(compact(build_pair(i, j, bound)));
    }
  }
  return sys;
}

void CumulantSystem::eval_equation(
    const Equation& eq, const std::array<Complex, 9>& f,
    const std::array<std::array<Complex, 9>, 9>& s, Complex& out) const {
  Complex acc{0.0, 0.0};
  for (const auto& t : eq.first_terms) {
    acc += t.coeff * f[static_cast<std::size_t>(t.label)];
  }
  for (const auto& t : eq.pair_terms) {
    acc += t.coeff * s[static_cast<std::size_t>(t.label_a)]
                      [static_cast<std::size_t>(t.label_b)];
  }
  for (const auto& t : eq.triple_terms) {
    const auto x = static_cast<std::size_t>(t.x);
    const auto y = static_cast<std::size_t>(t.y);
    const auto z = static_cast<std::size_t>(t.z);
    acc += t.coeff * (s[x][y] * f[z] + s[x][z] * f[y] + s[y][z] * f[x] -
                      2.0 * f[x] * f[y] * f[z]);
  }
  out = acc;
}

namespace {

void reconstruct_full(const MomentState& m, std::array<Complex, 9>& f,
                      std::array<std::array<Complex, 9>, 9>& s) {
  for (int k = 0; k < kFirstMoments; ++k) {
    f[static_cast<std::size_t>(k)] = m.first[static_cast<std::size_t>(k)];
  }
  f[8] = 1.0 - f[0] - f[4];  // trace constraint over sigma_00/11/22
  for (int i = 0; i < kFirstMoments; ++i) {
    for (int j = i; j < kFirstMoments; ++j) {
      const Complex v =
          m.second[static_cast<std::size_t>(moment_pair_index(i, j))];
      s[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
      s[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = v;
    }
  }
  // sum_d <sigma_k (x) sigma_dd> = <sigma_k> fixes the sigma_22 border.
  for (int k = 0; k < kFirstMoments; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Complex v = f[ku] - s[ku][0] - s[ku][4];
    s[ku][8] = v;
    s[8][ku] = v;
  }
  s[8][8] = f[8] - s[8][0] - s[8][4];
}

}  // namespace

void CumulantSystem::rhs(const MomentState& state, MomentState& dstate) const {
  std::array<Complex, 9> f;
  std::array<std::array<Complex, 9>, 9> s;
  reconstruct_full(state, f, s);
  for (int k = 0; k < kFirstMoments; ++k) {
    eval_equation(first_eqs_[static_cast<std::size_t>(k)], f, s,
                  dstate.first[static_cast<std::size_t>(k)]);
  }
  int idx = 0;
  for (int i = 0; i < kFirstMoments; ++i) {
    for (int j = i; j < kFirstMoments; ++j, ++idx) {
      eval_equation(pair_eqs_[static_cast<std::size_t>(idx)], f, s,
                    dstate.second[static_cast<std::size_t>(idx)]);
    }
  }
}

void CumulantSystem::rhs_first_factorized(
    const std::array<Complex, kFirstMoments>& first,
    std::array<Complex, kFirstMoments>& dfirst) const {
  std::array<Complex, 9> f;
  for (int k = 0; k < kFirstMoments; ++k) {
    f[static_cast<std::size_t>(k)] = first[static_cast<std::size_t>(k)];
  }
  f[8] = 1.0 - f[0] - f[4];
  std::array<std::array<Complex, 9>, 9> s;
  for (int a = 0; a < 9; ++a) {
    for (int b = 0; b < 9; ++b) {
      s[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          f[static_cast<std::size_t>(a)] * f[static_cast<std::size_t>(b)];
    }
  }
  for (int k = 0; k < kFirstMoments; ++k) {
    eval_equation(first_eqs_limit_[static_cast<std::size_t>(k)], f, s,
                  dfirst[static_cast<std::size_t>(k)]);
  }
}

namespace {

constexpr int kPackedSize = 2 * (kFirstMoments + kSecondMoments);

void pack_state(const MomentState& m, Eigen::VectorXd& y) {
  y.resize(kPackedSize);
  double* out = y.data();
  for (const Complex& c : m.first) {
    *out++ = c.real();
    *out++ = c.imag();
  }
  for (const Complex& c : m.second) {
    *out++ = c.real();
    *out++ = c.imag();
  }
}

void unpack_state(const Eigen::VectorXd& y, MomentState& m) {
  const double* in = y.data();
  for (Complex& c : m.first) {
    c = Complex(in[0], in[1]);
    in += 2;
  }
  for (Complex& c : m.second) {
    c = Complex(in[0], in[1]);
    in += 2;
  }
}

std::vector<double> uniform_times(const IntegratorConfig& cfg) {
  std::vector<double> times(static_cast<std::size_t>(cfg.n_samples));
  for (int i = 0; i < cfg.n_samples; ++i) {
    times[static_cast<std::size_t>(i)] =
        cfg.t_final * double(i) / double(cfg.n_samples - 1);
  }
  return times;
}

}  // namespace

AmplitudeSeries integrate_cumulant(const CumulantSystem& sys,
                                   const MomentState& init,
                                   const IntegratorConfig& cfg) {
  cfg.validate();
  const auto times = uniform_times(cfg);
  AmplitudeSeries series;
  series.times = times;
  series.amps.resize(times.size());
  series.abs_amps.resize(times.size());

  Eigen::VectorXd y;
  pack_state(init, y);
  MomentState scratch, dscratch;
  auto rhs = [&](double, const Eigen::VectorXd& yv, Eigen::VectorXd& dyv) {
    unpack_state(yv, scratch);
    sys.rhs(scratch, dscratch);
    pack_state(dscratch, dyv);
  };
  auto on_sample = [&](std::size_t idx, double, const Eigen::VectorXd& yv) {
    unpack_state(yv, scratch);
    const Complex amp = scratch.amplitude();
    series.amps[idx] = amp;
    series.abs_amps[idx] = std::abs(amp);
    series.max_pairing_error = std::max(series.max_pairing_error,
                                        scratch.hermiticity_pairing_error());
  };
  OdeOptions opt{cfg.rel_tol, cfg.abs_tol, cfg.max_step};
  integrate_rk45(rhs, y, 0.0, std::span<const double>(times), opt, on_sample);
  return series;
}

AmplitudeSeries integrate_cumulant_meanfield(const CumulantSystem& sys,
                                             const MomentState& init,
                                             const IntegratorConfig& cfg) {
  cfg.validate();
  const auto times = uniform_times(cfg);
  AmplitudeSeries series;
  series.times = times;
  series.amps.resize(times.size());
  series.abs_amps.resize(times.size());

  Eigen::VectorXd y(2 * kFirstMoments);
  for (int k = 0; k < kFirstMoments; ++k) {
    y(2 * k) = init.first[static_cast<std::size_t>(k)].real();
    y(2 * k + 1) = init.first[static_cast<std::size_t>(k)].imag();
  }
  std::array<Complex, kFirstMoments> f, df;
  auto rhs = [&](double, const Eigen::VectorXd& yv, Eigen::VectorXd& dyv) {
    for (int k = 0; k < kFirstMoments; ++k) {
      f[static_cast<std::size_t>(k)] = Complex(yv(2 * k), yv(2 * k + 1));
    }
    sys.rhs_first_factorized(f, df);
    for (int k = 0; k < kFirstMoments; ++k) {
      dyv(2 * k) = df[static_cast<std::size_t>(k)].real();
      dyv(2 * k + 1) = df[static_cast<std::size_t>(k)].imag();
    }
  };
  auto on_sample = [&](std::size_t idx, double, const Eigen::VectorXd& yv) {
    const Complex amp =
        std::numbers::sqrt2 *
        (Complex(yv(2 * 7), yv(2 * 7 + 1)) + Complex(yv(2 * 3), yv(2 * 3 + 1)));
    series.amps[idx] = amp;
    series.abs_amps[idx] = std::abs(amp);
  };
  OdeOptions opt{cfg.rel_tol, cfg.abs_tol, cfg.max_step};
  integrate_rk45(rhs, y, 0.0, std::span<const double>(times), opt, on_sample);
  return series;
}

std::optional<double> lifetime(const AmplitudeSeries& series) {
  const auto& a = series.abs_amps;
  const auto& t = series.times;
  if (a.empty() || !(a[0] > 0.0)) {
    throw std::invalid_argument("lifetime: series must start at a positive amplitude");
  }
  const double threshold = a[0] / std::numbers::e;
  constexpr std::size_t kHold = 10;
  for (std::size_t i = 1; i + kHold <= a.size(); ++i) {
    if (a[i] >= threshold) continue;
    bool stays = true;
    for (std::size_t j = i; j < i + kHold; ++j) {
      if (a[j] >= threshold) {
        stays = false;
        break;
      }
    }
    if (!stays) continue;
    // Linear interpolation between the bracketing samples.
    const double a0 = a[i - 1], a1 = a[i];
    const double frac = a0 > a1 ? (a0 - threshold) / (a0 - a1) : 1.0;
    return t[i - 1] + frac * (t[i] - t[i - 1]);
  }
  return std::nullopt;
}

}  // namespace macrosync
