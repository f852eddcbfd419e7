#include <doctest.h>

#include <cmath>
#include <random>

#include "ifesim/qm.hpp"

using namespace ifesim;

namespace {

Spinor random_spinor(int n, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Spinor p(n);
  for (int a = 0; a < n; ++a) p[a] = {nd(rng), nd(rng)};
  return p.normalized();
}

}  // namespace

TEST_CASE("angular momentum matrices for J = 3/2") {
  const auto J = build_angular_momentum(1.5);
  REQUIRE(J.dim() == 4);
  const double diag[] = {1.5, 0.5, -0.5, -1.5};
  for (int a = 0; a < 4; ++a) CHECK(J.Jz(a, a).real() == doctest::Approx(diag[a]));
  CHECK(J.Jx(0, 1).real() == doctest::Approx(std::sqrt(3.0) / 2));
  CHECK(std::abs(J.Jx(0, 0)) == 0);
  CHECK(std::abs(J.Jx(0, 2)) == 0);
  CHECK(std::abs(J.Jx(0, 3)) == 0);
  // [Jx, Jy] = i Jz
  CHECK((commutator(J.Jx, J.Jy) - I * J.Jz).norm() < 1e-13);
  // J^2 = J(J+1)
  const Operator J2 = J.Jx * J.Jx + J.Jy * J.Jy + J.Jz * J.Jz;
  CHECK((J2 - 3.75 * Operator::Identity(4, 4)).norm() < 1e-13);
}

TEST_CASE("J = 1/2 gives half the Pauli matrices") {
  const auto J = build_angular_momentum(0.5);
  Operator sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -I, I, 0;
  sz << 1, 0, 0, -1;
  CHECK((J.Jx - 0.5 * sx).norm() < 1e-15);
  CHECK((J.Jy - 0.5 * sy).norm() < 1e-15);
  CHECK((J.Jz - 0.5 * sz).norm() < 1e-15);
}

TEST_CASE("invalid J is rejected") {
  CHECK_THROWS(build_angular_momentum(0.7));
  CHECK_THROWS(build_angular_momentum(-0.5));
}

TEST_CASE("transition basis elements") {
  const Operator N12p = build_N(0, 1, 1, 4);
  Operator expect = Operator::Zero(4, 4);
  expect(0, 1) = expect(1, 0) = 1;
  CHECK((N12p - expect).norm() == 0);
  const Operator N12m = build_N(0, 1, -1, 4);
  CHECK(N12m(0, 1) == -I);
  CHECK(N12m(1, 0) == I);
  CHECK_THROWS(build_N(1, 1, -1, 4));

  const auto basis = n_basis(4);
  REQUIRE(basis.size() == 16);
  CHECK(basis[0] == NIndex{0, 0, 1});
  CHECK(basis[1] == NIndex{0, 1, 1});
  CHECK(basis[2] == NIndex{0, 1, -1});
  for (std::size_t k = 0; k < basis.size(); ++k) CHECK(n_basis_position(basis[k], 4) == static_cast<int>(k));
}

TEST_CASE("expectations") {
  const auto J = build_angular_momentum(1.5);
  Spinor up = Spinor::Zero(4);
  up[0] = 1;
  CHECK(expectation(up, J.Jz).real() == doctest::Approx(1.5));

  const double c = 1 / (2 * std::sqrt(2.0)), d = std::sqrt(3.0) / (2 * std::sqrt(2.0));
  Spinor psi(4);
  psi << c, d, d, c;
  CHECK(expectation(psi, J.Jx).real() == doctest::Approx(1.5));

  std::mt19937 rng(11);
  for (int it = 0; it < 20; ++it) {
    const Spinor p = random_spinor(4, rng);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        const cplx direct = std::conj(p[a]) * p[b] + p[a] * std::conj(p[b]);
        CHECK(std::abs(expectation(p, build_N(a, b, 1, 4)) - direct) < 1e-14);
      }
  }
}

TEST_CASE("Hermitian expansion reproduces expectations") {
  std::mt19937 rng(12);
  const auto J = build_angular_momentum(1.5);
  const Operator O = J.Jx * J.Jz + J.Jz * J.Jx + 0.3 * J.Jy;
  const Eigen::VectorXd c = n_coefficients(O);
  for (int it = 0; it < 20; ++it) {
    const Spinor p = random_spinor(4, rng);
    CHECK(c.dot(n_expectations(p)) == doctest::Approx(expectation(p, O).real()).epsilon(1e-12));
  }
}

TEST_CASE("propagator") {
  const auto S = build_angular_momentum(0.5);
  const Operator H = -0.37 * S.Jx;
  CHECK((propagator(H, 0) - Operator::Identity(2, 2)).norm() < 1e-15);
  const double t = 2.9;
  const Operator U = propagator(H, t);
  CHECK(unitarity_defect(U) < 1e-14);
  // eigenphases +-Bt/2
  Eigen::ComplexEigenSolver<Operator> es(U);
  std::vector<double> ph;
  for (int i = 0; i < 2; ++i) ph.push_back(std::abs(std::arg(es.eigenvalues()[i])));
  CHECK(ph[0] == doctest::Approx(0.37 * t / 2));
  CHECK(ph[1] == doctest::Approx(0.37 * t / 2));
  // Evolution agrees with a fresh eigendecomposition
  const Evolution ev(H);
  CHECK((ev.at(t) - U).norm() < 1e-14);
  CHECK_THROWS(propagator(Operator::Random(2, 2) + I * Operator::Identity(2, 2), 1.0));
}
