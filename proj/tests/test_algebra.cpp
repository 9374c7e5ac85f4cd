#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "macrosync/algebra.hpp"
#include "macrosync/model.hpp"
#include "macrosync/ode.hpp"

#include <random>

using namespace macrosync;

namespace {

CMatrix random_matrix(int d, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(u(rng), u(rng));
  return m;
}

CMatrix random_density(int d, std::mt19937& rng) {
  CMatrix m = random_matrix(d, rng);
  CMatrix rho = m * m.adjoint();
  rho /= rho.trace();
  return rho;
}

// Characteristic polynomial coefficients by the Faddeev-LeVerrier recursion.
std::vector<Complex> char_poly(const CMatrix& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<Complex> c(static_cast<std::size_t>(n) + 1);
  c[0] = 1.0;
  CMatrix m = CMatrix::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    m = a * m + c[static_cast<std::size_t>(k - 1)] * CMatrix::Identity(n, n);
    c[static_cast<std::size_t>(k)] = -(a * m).trace() / double(k);
  }
  return c;  // p(x) = sum_k c[k] x^{n-k}
}

Complex poly_eval(const std::vector<Complex>& c, Complex x) {
  Complex acc = 0.0;
  for (const Complex& ck : c) acc = acc * x + ck;
  return acc;
}

}  // namespace

TEST_CASE("spin-1 operators have the stated matrix elements") {
  const auto& s = spin1_operators();
  const double r2 = std::sqrt(2.0);

  Vector3 e0{1, 0, 0}, e1{0, 1, 0}, e2{0, 0, 1};
  CHECK((s.sz * e1).norm() == doctest::Approx(0.0));
  CHECK((s.sp * e0 - r2 * e1).norm() == doctest::Approx(0.0));
  CHECK((s.sz * e2 - e2).norm() == doctest::Approx(0.0));
  CHECK((s.sz * e0 + e0).norm() == doctest::Approx(0.0));

  // [S+, S-]|2> = 2|2> by direct multiplication.
  const Matrix3 comm = s.sp * s.sm - s.sm * s.sp;
  CHECK((comm * e2 - 2.0 * e2).norm() == doctest::Approx(0.0).epsilon(1e-14));

  // S^y is Hermitian and equals i(S- - S+)/2.
  CHECK((s.sy - s.sy.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  const Matrix3 sy = Complex(0, 1) * (s.sm - s.sp) / 2.0;
  CHECK((s.sy - sy).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("dissipator worked examples") {
  const Matrix3 j10 = projector(1, 0);
  const Matrix3 j12 = projector(1, 2);

  CMatrix d = dissipator(j10, projector(0, 0));
  CHECK((d - (projector(1, 1) - projector(0, 0))).cwiseAbs().maxCoeff() <
        1e-15);

  d = dissipator(j10, projector(1, 1));
  CHECK(d.cwiseAbs().maxCoeff() < 1e-15);

  d = dissipator(j12, CMatrix(CMatrix::Identity(3, 3) / 3.0));
  CHECK((d - (projector(1, 1) - projector(2, 2)) / 3.0).cwiseAbs().maxCoeff() <
        1e-15);

  CHECK_THROWS_AS(dissipator(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)),
                  DimensionError);
}

TEST_CASE("dissipator is traceless and Hermiticity-preserving") {
  std::mt19937 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const CMatrix o = random_matrix(3, rng);
    const CMatrix rho = hermitized(random_matrix(3, rng));
    const CMatrix d = dissipator(o, rho);
    CHECK(std::abs(d.trace()) <= 1e-12);
    CHECK(hermiticity_error(d) <= 1e-12);
  }
}

TEST_CASE("liouvillian matches the operator form") {
  const auto& s = spin1_operators();

  SUBCASE("zero generator") {
    const Superoperator l = liouvillian(CMatrix(CMatrix::Zero(3, 3)));
    CHECK(l.matrix().cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("commutator: -i[S^z, |2><0|] = -2i|2><0|") {
    const Superoperator l = liouvillian(CMatrix(s.sz));
    const CMatrix out = l.apply(projector(2, 0));
    const CMatrix expect = Complex(0, -2) * projector(2, 0);
    CHECK((out - expect).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("full single-site generator annihilates |1><1|") {
    ModelParams p;
    p.gamma_plus = 0.7;
    p.k = 0.3;
    p.delta = 0.2;
    const Superoperator l = single_site_liouvillian(p, Group::A);
    CHECK(l.apply(projector(1, 1)).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("vectorized action equals operator-level action") {
    std::mt19937 rng(5);
    ModelParams p;
    p.gamma_plus = 0.4;
    p.k = -0.5;
    const CMatrix h = hermitized(random_matrix(3, rng));
    const std::vector<std::pair<double, CMatrix>> jumps{
        {0.3, random_matrix(3, rng)}, {1.2, random_matrix(3, rng)}};
    const Superoperator l = liouvillian(h, jumps);
    for (int rep = 0; rep < 10; ++rep) {
      const CMatrix rho = random_matrix(3, rng);
      CMatrix expect = Complex(0, -1) * (h * rho - rho * h);
      for (const auto& [rate, j] : jumps) expect += rate * dissipator(j, rho);
      CHECK((l.apply(rho) - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("trace functional is a left null vector") {
    ModelParams p;
    p.gamma_plus = 0.9;
    p.k = 1.5;
    p.omega = 0.2;
    const Superoperator l = driven_liouvillian(p);
    CVector tr = CVector::Zero(9);
    for (int d = 0; d < 3; ++d) tr(d * 3 + d) = 1.0;
    CHECK((tr.transpose() * l.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("negative rate is rejected") {
    const std::vector<std::pair<double, CMatrix>> jumps{
        {-1.0, CMatrix(projector(1, 0))}};
    CHECK_THROWS_AS(liouvillian(CMatrix(CMatrix::Zero(3, 3)), jumps),
                    std::invalid_argument);
  }
}

TEST_CASE("vectorize/devectorize round-trip is exact") {
  std::mt19937 rng(3);
  const CMatrix m = random_matrix(9, rng);
  CHECK((devectorize(vectorize(m), 9) - m).cwiseAbs().maxCoeff() == 0.0);
  // Column stacking: vec[i + d j] = m(i, j).
  const CVector v = vectorize(m);
  CHECK(v(2 + 9 * 5) == m(2, 5));
}

TEST_CASE("tensor product basics") {
  const CMatrix i3 = CMatrix::Identity(3, 3);
  CHECK((tensor(i3, i3) - CMatrix::Identity(9, 9)).cwiseAbs().maxCoeff() ==
        0.0);

  const CMatrix p11 = tensor(CMatrix(projector(1, 1)), CMatrix(projector(1, 1)));
  CVector e11 = CVector::Zero(9);
  e11(3 * 1 + 1) = 1.0;
  CHECK((p11 - CMatrix(e11 * e11.adjoint())).cwiseAbs().maxCoeff() == 0.0);

  // (S+ (x) S-) |1,1> = 2 |2,0> in the A-first product basis.
  const auto& s = spin1_operators();
  const CMatrix op = tensor(CMatrix(s.sp), CMatrix(s.sm));
  CVector e20 = CVector::Zero(9);
  e20(3 * 2 + 0) = 1.0;
  CHECK((op * e11 - 2.0 * e20).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("eigen_spectrum") {
  SUBCASE("diagonal matrix") {
    CMatrix m = CMatrix::Zero(3, 3);
    m(0, 0) = 1.0;
    m(1, 1) = Complex(0, 2);
    m(2, 2) = -3.0;
    auto ev = eigen_spectrum(m);
    std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) {
      return a.real() < b.real();
    });
    CHECK(std::abs(ev[0] - Complex(-3, 0)) < 1e-12);
    CHECK(std::abs(ev[1] - Complex(0, 2)) < 1e-12);
    CHECK(std::abs(ev[2] - Complex(1, 0)) < 1e-12);
  }

  SUBCASE("eigenvalue sum equals trace") {
    std::mt19937 rng(8);
    const CMatrix m = random_matrix(9, rng);
    const auto ev = eigen_spectrum(m);
    Complex sum = 0.0;
    for (auto v : ev) sum += v;
    CHECK(std::abs(sum - m.trace()) < 1e-8);
  }

  SUBCASE("uncoupled generator contains a zero eigenvalue") {
    ModelParams p;
    p.gamma_plus = 0.5;
    const auto ev =
        eigen_spectrum(single_site_liouvillian(p, Group::A).matrix());
    double best = 1e9;
    for (auto v : ev) best = std::min(best, std::abs(v));
    CHECK(best < 1e-12);
  }

  SUBCASE("Hermitian 9x9 against the characteristic-polynomial oracle") {
    std::mt19937 rng(21);
    const CMatrix m = hermitized(random_matrix(9, rng));
    auto ev = eigen_spectrum(m);
    for (auto v : ev) CHECK(std::abs(v.imag()) <= 1e-10);
    const auto poly = char_poly(m);
    // Companion-style verification: every reported eigenvalue is a root of
    // the independently computed characteristic polynomial, with Newton
    // refinement agreeing to 1e-8.
    for (auto v : ev) {
      Complex x = v;
      for (int it = 0; it < 5; ++it) {
        // p'(x) by finite-free derivative of the coefficient form.
        Complex pv = poly_eval(poly, x);
        std::vector<Complex> dpoly(poly.size() - 1);
        for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
          dpoly[k] = poly[k] * double(poly.size() - 1 - k);
        }
        Complex dv = poly_eval(dpoly, x);
        if (std::abs(dv) < 1e-14) break;
        x -= pv / dv;
      }
      CHECK(std::abs(x - v) < 1e-8);
    }
  }
}

TEST_CASE("expectation is linear and diagonal states carry no amplitude") {
  std::mt19937 rng(4);
  const auto& s = spin1_operators();
  const CMatrix a = random_matrix(3, rng);
  const CMatrix b = random_matrix(3, rng);
  const CMatrix o = random_matrix(3, rng);
  const Complex lhs = expectation(a + 2.0 * b, o);
  const Complex rhs = expectation(a, o) + 2.0 * expectation(b, o);
  CHECK(std::abs(lhs - rhs) < 1e-12);

  CMatrix diag = CMatrix::Zero(3, 3);
  diag(0, 0) = 0.2;
  diag(1, 1) = 0.5;
  diag(2, 2) = 0.3;
  CHECK(std::abs(expectation(diag, CMatrix(s.sp))) == 0.0);
}

TEST_CASE("DensityMatrix validation") {
  CHECK_NOTHROW(DensityMatrix::validated(CMatrix::Identity(3, 3) / 3.0));
  CMatrix bad = CMatrix::Identity(3, 3) / 3.0;
  bad(0, 1) = 0.5;  // breaks Hermiticity
  CHECK_THROWS_AS(DensityMatrix::validated(bad), std::invalid_argument);
  CMatrix neg = CMatrix::Zero(3, 3);
  neg(0, 0) = 1.2;
  neg(1, 1) = -0.2;
  CHECK_THROWS_AS(DensityMatrix::validated(neg), std::invalid_argument);
}

TEST_CASE("steady_state_nullspace") {
  SUBCASE("uncoupled model relaxes to |1><1|") {
    ModelParams p;
    p.gamma_plus = 0.8;
    p.k = 0.4;
    const auto rho = steady_state_nullspace(single_site_liouvillian(p, Group::A));
    CHECK((rho.matrix() - projector(1, 1)).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("equal rates without drive keep the same fixed point") {
    ModelParams p;
    p.gamma_plus = 1.0;
    p.k = 2.0;
    const auto rho = steady_state_nullspace(driven_liouvillian(p));
    CHECK((rho.matrix() - projector(1, 1)).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("driven oscillator develops finite amplitude, checked against a"
          " long-time integration oracle") {
    ModelParams p;
    p.gamma_plus = 0.5;
    p.omega = 0.1;
    const Superoperator l = driven_liouvillian(p);
    const auto rho_ss = steady_state_nullspace(l);
    CHECK((l.matrix() * vectorize(rho_ss.matrix())).norm() <= 1e-10);

    const auto& s = spin1_operators();
    CHECK(std::abs(expectation(rho_ss.matrix(), CMatrix(s.sp))) > 1e-3);

    // Oracle: evolve I/3 for a long time with the adaptive integrator.
    const CMatrix& lm = l.matrix();
    Eigen::VectorXd y(18);
    {
      const CVector v0 = vectorize(CMatrix(CMatrix::Identity(3, 3) / 3.0));
      for (int i = 0; i < 9; ++i) {
        y(2 * i) = v0(i).real();
        y(2 * i + 1) = v0(i).imag();
      }
    }
    auto rhs = [&](double, const Eigen::VectorXd& yv, Eigen::VectorXd& dyv) {
      CVector v(9);
      for (int i = 0; i < 9; ++i) v(i) = Complex(yv(2 * i), yv(2 * i + 1));
      const CVector dv = lm * v;
      for (int i = 0; i < 9; ++i) {
        dyv(2 * i) = dv(i).real();
        dyv(2 * i + 1) = dv(i).imag();
      }
    };
    const std::vector<double> times{200.0};
    CMatrix final_state(3, 3);
    integrate_rk45(rhs, y, 0.0, std::span<const double>(times),
                   OdeOptions{1e-11, 1e-11, 0.5},
                   [&](std::size_t, double, const Eigen::VectorXd& yv) {
                     CVector v(9);
                     for (int i = 0; i < 9; ++i) {
                       v(i) = Complex(yv(2 * i), yv(2 * i + 1));
                     }
                     final_state = devectorize(v, 3);
                   });
    CHECK((final_state - rho_ss.matrix()).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("degenerate kernel is reported") {
    // gamma_plus = 0 leaves the |0> population disconnected: two steady
    // states.
    ModelParams p;
    p.gamma_plus = 0.0;
    CHECK_THROWS_AS(
        steady_state_nullspace(single_site_liouvillian(p, Group::A)),
        DegenerateSteadyStateError);
  }
}
