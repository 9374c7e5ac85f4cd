#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "macrosync/model.hpp"

#include <random>

using namespace macrosync;

namespace {

Matrix3 random_hermitian_state(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = Complex(u(rng), u(rng));
  Matrix3 rho = m * m.adjoint();
  rho /= rho.trace().real();
  return rho;
}

ModelParams random_params(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::uniform_real_distribution<double> s(-2.0, 2.0);
  ModelParams p;
  p.gamma_plus = u(rng);
  p.delta = s(rng);
  p.k = s(rng);
  p.v = u(rng);
  p.v_ab = u(rng);
  return p;
}

}  // namespace

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.gamma_plus = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.gamma_plus = 0.5;
  p.gamma_minus = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.gamma_minus = 1.0;
  p.delta = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("group Hamiltonian") {
  const auto& s = spin1_operators();

  SUBCASE("vanishing mean fields leave the bare terms") {
    ModelParams p;
    p.delta = 0.8;
    p.k = -0.3;
    p.v = 1.0;
    p.v_ab = 0.7;
    const Matrix3 h = group_hamiltonian(p, Group::A, 0.0, 0.0);
    const Matrix3 expect = 0.4 * s.sz - 0.3 * projector(2, 2);
    CHECK((h - expect).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("unit mean field gives S+ + S-") {
    ModelParams p;
    p.v = 1.0;
    const Matrix3 h = group_hamiltonian(p, Group::A, 1.0, 0.0);
    CHECK((h - (s.sp + s.sm)).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("group B flips the detuning sign") {
    ModelParams p;
    p.delta = 1.2;
    const Matrix3 ha = group_hamiltonian(p, Group::A, 0.0, 0.0);
    const Matrix3 hb = group_hamiltonian(p, Group::B, 0.0, 0.0);
    CHECK((ha + hb).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("Hermitian for arbitrary complex amplitudes") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
      const ModelParams p = random_params(rng);
      const Matrix3 h = group_hamiltonian(p, Group::B, Complex(u(rng), u(rng)),
                                          Complex(u(rng), u(rng)));
      CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    }
  }

  SUBCASE("A <-> B swap with delta -> -delta is a symmetry") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
      ModelParams p = random_params(rng);
      const Complex m1(u(rng), u(rng)), m2(u(rng), u(rng));
      ModelParams q = p;
      q.delta = -p.delta;
      const Matrix3 ha = group_hamiltonian(p, Group::A, m1, m2);
      const Matrix3 hb = group_hamiltonian(q, Group::B, m1, m2);
      CHECK((ha - hb).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("mean-field right-hand side") {
  SUBCASE("|1><1| is a fixed point for any parameters") {
    std::mt19937 rng(17);
    const Matrix3 fp = projector(1, 1);
    for (int rep = 0; rep < 50; ++rep) {
      const ModelParams p = random_params(rng);
      Matrix3 da, db;
      meanfield_rhs(p, fp, fp, da, db);
      CHECK(da.cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(db.cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  SUBCASE("uncoupled flow of I/3 is pure relaxation") {
    ModelParams p;
    p.gamma_plus = 0.7;
    const Matrix3 rho = Matrix3::Identity() / 3.0;
    Matrix3 da, db;
    meanfield_rhs(p, rho, Matrix3(projector(1, 1)), da, db);
    const Matrix3 expect =
        (p.gamma_plus / 3.0) *
            Matrix3(projector(1, 1) - projector(0, 0)) +
        (p.gamma_minus / 3.0) * Matrix3(projector(1, 1) - projector(2, 2));
    CHECK((da - expect).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("derivatives are traceless and Hermiticity-preserving") {
    std::mt19937 rng(23);
    for (int rep = 0; rep < 20; ++rep) {
      const ModelParams p = random_params(rng);
      const Matrix3 ra = random_hermitian_state(rng);
      const Matrix3 rb = random_hermitian_state(rng);
      Matrix3 da, db;
      meanfield_rhs(p, ra, rb, da, db);
      CHECK(std::abs(da.trace()) <= 1e-12);
      CHECK(std::abs(db.trace()) <= 1e-12);
      CHECK((da - da.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((db - db.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  SUBCASE("zero mean fields reduce to the uncoupled generator") {
    std::mt19937 rng(29);
    ModelParams p = random_params(rng);
    // A diagonal state has no amplitude, so the coupling terms drop out.
    Matrix3 diag = Matrix3::Zero();
    diag(0, 0) = 0.5;
    diag(1, 1) = 0.2;
    diag(2, 2) = 0.3;
    Matrix3 da, db;
    meanfield_rhs(p, diag, diag, da, db);
    const CMatrix expect =
        single_site_liouvillian(p, Group::A).apply(CMatrix(diag));
    CHECK((CMatrix(da) - expect).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("driven generator") {
  SUBCASE("undriven steady state is |1><1|") {
    ModelParams p;
    p.gamma_plus = 0.6;
    p.omega = 0.0;
    const auto rho = steady_state_nullspace(driven_liouvillian(p));
    CHECK((rho.matrix() - projector(1, 1)).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("first-order amplitude cancels at equal rates and k = 0") {
    ModelParams p;
    p.gamma_plus = 1.0;
    p.omega = 0.1;
    const auto rho = steady_state_nullspace(driven_liouvillian(p));
    const auto& s = spin1_operators();
    CHECK(std::abs(expectation(rho.matrix(), CMatrix(s.sp))) < 1e-10);
  }
}

TEST_CASE("two-oscillator generator") {
  SUBCASE("uncoupled steady state is the product dark state") {
    ModelParams p;
    p.gamma_plus = 0.5;
    p.delta = 1.0;
    p.k = 0.7;
    p.v_ab = 0.0;
    const auto rho = steady_state_nullspace(two_oscillator_liouvillian(p));
    const CMatrix expect =
        tensor(CMatrix(projector(1, 1)), CMatrix(projector(1, 1)));
    CHECK((rho.matrix() - expect).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("trace functional is left-null for random parameters") {
    std::mt19937 rng(31);
    const ModelParams p = random_params(rng);
    const Superoperator l = two_oscillator_liouvillian(p);
    CVector tr = CVector::Zero(81);
    for (int d = 0; d < 9; ++d) tr(d * 9 + d) = 1.0;
    CHECK((tr.transpose() * l.matrix()).cwiseAbs().maxCoeff() < 1e-11);
  }
}
