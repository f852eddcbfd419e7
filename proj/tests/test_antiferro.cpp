#include <doctest.h>

#include <cmath>
#include <random>

#include "ifesim/antiferro.hpp"
#include "ifesim/oracle.hpp"
#include "ifesim/units.hpp"

using namespace ifesim;

namespace {

AntiferroSpec spec(CrystalAxis axis, double Jex_meV, double Delta_meV) {
  AntiferroSpec s;
  s.axis = axis;
  s.Jex = units::meV_to_au(Jex_meV);
  s.Delta = units::meV_to_au(Delta_meV);
  s.Delta_e = units::meV_to_au(axis == CrystalAxis::z ? 3 : -3);
  s.eps_ex = units::eV_to_au(2);
  s.pulse = {amplitude_from_intensity(2e10), units::fs_to_au(100), units::eV_to_au(2), 0};
  return s;
}

Spinor random_spinor(std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Spinor p(4);
  for (int a = 0; a < 4; ++a) p[a] = {nd(rng), nd(rng)};
  return p.normalized();
}

// sublattice 2 mirrors sublattice 1: Jx, Jy reversed, Jz kept
Spinor mirror(const Spinor& p) {
  Spinor q = p;
  q[1] = -q[1];
  q[3] = -q[3];
  return q;
}

Eigen::VectorXd random_vec(std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(4);
  for (int a = 0; a < 4; ++a) v[a] = nd(rng);
  return v;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_THROWS(validate(spec(CrystalAxis::z, 3, -2)));
  CHECK_THROWS(validate(spec(CrystalAxis::x, 3, 2)));
  CHECK_THROWS(validate(spec(CrystalAxis::x, -1, -2)));
  CHECK_NOTHROW(validate(spec(CrystalAxis::x, 0, -2)));
}

TEST_CASE("ground state") {
  const auto J = build_angular_momentum(1.5);
  const double c0 = 1 / (2 * std::sqrt(2.0)), d0 = std::sqrt(3.0) / (2 * std::sqrt(2.0));
  SUBCASE("axis x is analytic") {
    const GroundState g = ground_state(spec(CrystalAxis::x, 3, -2));
    CHECK(g.Jx1 == doctest::Approx(1.5));
    CHECK(g.c == doctest::Approx(c0));
    CHECK(g.d == doctest::Approx(d0));
  }
  SUBCASE("axis z with a vanishing crystal field approaches full polarization") {
    const GroundState g = ground_state(spec(CrystalAxis::z, 3, 1e-6));
    CHECK(g.Jx1 == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(g.c == doctest::Approx(c0).epsilon(1e-5));
  }
  SUBCASE("axis z partial quenching") {
    const GroundState g = ground_state(spec(CrystalAxis::z, 3, 2));
    CHECK(g.Jx1 < 1.5);
    CHECK(g.Jx1 == doctest::Approx(1.298654).epsilon(1e-6));
    CHECK(ground_state(spec(CrystalAxis::z, 3, 0.02)).Jx1 == doctest::Approx(1.499934).epsilon(1e-6));
    CHECK(2 * g.c * g.c + 2 * g.d * g.d == doctest::Approx(1.0));
    Spinor expect(4);
    expect << g.c, g.d, g.d, g.c;
    CHECK((g.psi1 - expect).norm() < 1e-12);
    CHECK((g.psi2 - mirror(g.psi1)).norm() < 1e-12);
    CHECK(std::abs(expectation(g.psi1, J.Jy)) < 1e-12);
    CHECK(std::abs(expectation(g.psi1, J.Jz)) < 1e-12);
    CHECK(expectation(g.psi2, J.Jx).real() == doctest::Approx(-g.Jx1));
    // self-consistency: psi1 is the lowest state of its own mean-field Hamiltonian
    Eigen::SelfAdjointEigenSolver<Operator> es(sublattice_hamiltonian(spec(CrystalAxis::z, 3, 2), g, 1));
    CHECK(std::abs(std::abs(es.eigenvectors().col(0).dot(g.psi1)) - 1) < 1e-10);
  }
}

TEST_CASE("excited-term crystal field") {
  const double mev = units::meV_to_au(1);
  const AntiferroSpec z = spec(CrystalAxis::z, 3, 2);
  const ExcitedScheme ez = excited_scheme(z);
  REQUIRE(ez.levels.size() == 3);
  CHECK(ez.levels[0] - z.eps_ex == doctest::Approx(-24 * mev));
  CHECK(ez.levels[1] - z.eps_ex == doctest::Approx(-6 * mev));
  CHECK(ez.levels[2] - z.eps_ex == doctest::Approx(30 * mev));

  const AntiferroSpec x = spec(CrystalAxis::x, 3, -2);
  const ExcitedScheme ex = excited_scheme(x);
  CHECK(ex.H(0, 2).real() == doctest::Approx(3 * std::sqrt(10.0) / 2 * x.Delta_e));
  CHECK(ex.H(1, 3).real() == doctest::Approx(9 * std::sqrt(2.0) / 2 * x.Delta_e));
  REQUIRE(ex.levels.size() == 3);
  CHECK(ex.levels[0] - x.eps_ex == doctest::Approx(-30 * mev));
  CHECK(ex.levels[2] - x.eps_ex == doctest::Approx(24 * mev));
}

TEST_CASE("z-type excited term keeps the Raman map diagonal") {
  const Evolution Ue(excited_scheme(spec(CrystalAxis::z, 3, 2)).H);
  const Eigen::MatrixXcd D = dipole_D().cast<cplx>();
  for (double t : {0.0, 13.7, 2500.0}) {
    Eigen::MatrixXcd M = D.transpose() * Ue.at(t) * D;
    M.diagonal().setZero();
    CHECK(M.cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("Raman spinor vanishes without light and is equal for both sublattices") {
  AntiferroSpec s = spec(CrystalAxis::z, 3, 2);
  const GroundState g = ground_state(s);
  const Evolution U1(sublattice_hamiltonian(s, g, 1)), U2(sublattice_hamiltonian(s, g, 2));
  const Evolution Ue(excited_scheme(s).H);
  const TimeGrid grid = TimeGrid::around(s.pulse, 6, 0.1);
  {
    PulseSpec p = s.pulse;
    p.E = 0;
    CHECK(antiferro_C(p, U1, Ue, g.psi1, 1, grid).cwiseAbs().maxCoeff() == 0);
  }
  const RamanResult r1 = antiferro_A(antiferro_C(s.pulse, U1, Ue, g.psi1, 1, grid), g.psi1, s.pulse, grid);
  const RamanResult r2 = antiferro_A(antiferro_C(s.pulse, U2, Ue, g.psi2, 1, grid), g.psi2, s.pulse, grid);
  const EffectiveFields f1 = compute_fields(r1, U1, g.psi1), f2 = compute_fields(r2, U2, g.psi2);
  const double scale = std::max(f1.nu.cwiseAbs().maxCoeff(), f1.gamma.cwiseAbs().maxCoeff());
  CHECK(scale > 0);
  CHECK((f1.nu - f2.nu).cwiseAbs().maxCoeff() < 1e-10 * scale);
  CHECK((f1.gamma - f2.gamma).cwiseAbs().maxCoeff() < 1e-10 * scale);
  CHECK_THROWS(antiferro_C(s.pulse, U1, U1, g.psi1, 1, grid));
}

TEST_CASE("m/l variables") {
  std::mt19937 rng(31);
  const Spinor p1 = random_spinor(rng);
  const FullML f = full_ml(p1, mirror(p1));
  const MLState x = ml_from_full(f);
  CHECK(x[m1] + x[m2] + x[m3] + x[m4] == doctest::Approx(2.0));
  CHECK(max_excluded(f) < 1e-15);
  const MLVectors v = ml_vectors(f), w = ml_vectors(x);
  CHECK(std::abs(v.Mx) < 1e-15);
  CHECK(std::abs(v.My) < 1e-15);
  CHECK(std::abs(v.Lz) < 1e-15);
  CHECK(v.Lx == doctest::Approx(w.Lx));
  CHECK(v.Mz == doctest::Approx(w.Mz));
  // macroscopic vectors are the summed and staggered moments
  const auto J = build_angular_momentum(1.5);
  CHECK(v.Lx == doctest::Approx((expectation(p1, J.Jx) - expectation(mirror(p1), J.Jx)).real()));
  CHECK(v.Mz == doctest::Approx((expectation(p1, J.Jz) + expectation(mirror(p1), J.Jz)).real()));
  CHECK(excluded_variables().size() == 16);
  // sublattice expectations are recovered
  Eigen::VectorXd n1, n2;
  sublattice_expectations(f, n1, n2);
  CHECK((n1 - n_expectations(p1)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("commutator table, cell by cell, on random states") {
  const auto J = build_angular_momentum(1.5);
  const Operator ops[ml_columns][2] = {{J.Jx, -J.Jx}, {J.Jy, -J.Jy}, {J.Jz, J.Jz},
                                       {J.Jz * J.Jz, J.Jz * J.Jz}, {J.Jx * J.Jx, J.Jx * J.Jx}};
  std::mt19937 rng(32);
  std::vector<std::pair<Spinor, Spinor>> states;
  for (int i = 0; i < 100; ++i) states.emplace_back(random_spinor(rng), random_spinor(rng));
  for (int v = 0; v < ml_count; ++v) {
    for (int col = 0; col < ml_columns; ++col) {
      CAPTURE(ml_names()[static_cast<std::size_t>(v)]);
      CAPTURE(col);
      const NIndex k = ml_index(v);
      const Operator N = build_N(k, 4);
      const double w = k.diagonal() ? 1 : ml_weight(k.a) * ml_weight(k.b);
      const double sk = ml_is_l(v) ? -1 : 1;
      double worst = 0;
      for (const auto& [p1, p2] : states) {
        const MLState x = ml_from_full(full_ml(p1, p2));
        const double direct = w * (expectation(p1, -I * commutator(N, ops[col][0])).real() +
                                   sk * expectation(p2, -I * commutator(N, ops[col][1])).real());
        worst = std::max(worst, std::abs(direct - eval_cell(v, col, x)));
      }
      CHECK(worst < 1e-10);
    }
  }
}

TEST_CASE("reduced equations without light") {
  std::mt19937 rng(33);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  SUBCASE("l12 rotates at 6 Delta, l23 is constant") {
    const AntiferroSpec s = spec(CrystalAxis::z, 0, 2);
    const Spinor p = random_spinor(rng);
    const MLState x = ml_from_full(full_ml(p, mirror(p)));
    const MLState d = antiferro_eom_rhs(x, zero, zero, s);
    CHECK(std::hypot(d[l12p], d[l12m]) == doctest::Approx(6 * s.Delta * std::hypot(x[l12p], x[l12m])));
    CHECK(d[l12p] * x[l12p] + d[l12m] * x[l12m] == doctest::Approx(0).scale(std::abs(s.Delta)));
    CHECK(std::abs(d[l23p]) < 1e-16);
    CHECK(std::abs(d[l23m]) < 1e-16);
  }
  SUBCASE("diagonal variables sum to a constant") {
    for (CrystalAxis ax : {CrystalAxis::z, CrystalAxis::x}) {
      const AntiferroSpec s = spec(ax, 3, ax == CrystalAxis::z ? 2 : -2);
      const Spinor p = random_spinor(rng);
      const MLState d = antiferro_eom_rhs(ml_from_full(full_ml(p, mirror(p))), zero, zero, s);
      CHECK(std::abs(d[m1] + d[m2] + d[m3] + d[m4]) < 1e-15);
    }
  }
  SUBCASE("ground state is stationary") {
    for (CrystalAxis ax : {CrystalAxis::z, CrystalAxis::x}) {
      const AntiferroSpec s = spec(ax, 3, ax == CrystalAxis::z ? 2 : -2);
      const MLState d = antiferro_eom_rhs(initial_state(ground_state(s)), zero, zero, s);
      for (double v : d) CHECK(std::abs(v) < 1e-16);
    }
  }
}

TEST_CASE("reduced equations agree with the full sublattice equations") {
  // for mirrored states the 16 variables follow from the per-sublattice generic equations
  std::mt19937 rng(34);
  for (CrystalAxis ax : {CrystalAxis::z, CrystalAxis::x}) {
    const AntiferroSpec s = spec(ax, 3, ax == CrystalAxis::z ? 2 : -2);
    for (int it = 0; it < 50; ++it) {
      const Spinor p1 = random_spinor(rng), p2 = mirror(p1);
      const Eigen::VectorXd nu = random_vec(rng), ga = random_vec(rng);
      const FullML f = full_ml(p1, p2);
      const auto J = build_angular_momentum(1.5);
      const Operator cr = crystal_field(ax, s.Delta, 1.5);
      const Eigen::VectorXd J1 = Eigen::Vector3d(expectation(p1, J.Jx).real(), expectation(p1, J.Jy).real(),
                                                 expectation(p1, J.Jz).real());
      const Eigen::VectorXd J2 = Eigen::Vector3d(expectation(p2, J.Jx).real(), expectation(p2, J.Jy).real(),
                                                 expectation(p2, J.Jz).real());
      const Operator H1 = cr + s.Jex * (J2[0] * J.Jx + J2[1] * J.Jy + J2[2] * J.Jz);
      const Operator H2 = cr + s.Jex * (J1[0] * J.Jx + J1[1] * J.Jy + J1[2] * J.Jz);
      const FullML d = full_ml(eom_rhs(nu, ga, n_expectations(p1), H1), eom_rhs(nu, ga, n_expectations(p2), H2));
      const MLState expect = ml_from_full(d);
      const MLState got = antiferro_eom_rhs(ml_from_full(f), nu, ga, s);
      for (int k = 0; k < ml_count; ++k) CHECK(got[static_cast<std::size_t>(k)] == doctest::Approx(expect[static_cast<std::size_t>(k)]).scale(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("aggregate drivers reproduce the macroscopic equations") {
  std::mt19937 rng(35);
  AntiferroSpec s = spec(CrystalAxis::z, 0, 2);
  s.Delta = 0;  // magnetic Hamiltonian off: only the light-driven part remains
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  for (int it = 0; it < 50; ++it) {
    const Spinor p = random_spinor(rng);
    const MLState x = ml_from_full(full_ml(p, mirror(p)));
    const Eigen::VectorXd nu = random_vec(rng), ga = random_vec(rng);
    const MLVectors v = ml_vectors(x), d = ml_vectors(antiferro_eom_rhs(x, nu, ga, s));
    const MLDrivers dr = ml_drivers(x, nu, ga);
    CHECK(d.Lx == doctest::Approx(dr.F0 * v.Lx + dr.g * v.Ly + dr.Fx + dr.Gx).epsilon(1e-12));
    CHECK(d.Ly == doctest::Approx(dr.F0 * v.Ly - dr.g * v.Lx + dr.Fy - dr.Gy).epsilon(1e-12));
    CHECK(d.Mz == doctest::Approx(dr.F0 * v.Mz + dr.Fz).epsilon(1e-12));
    const MLDrivers z = ml_drivers(x, zero, zero);
    CHECK(z.F0 == 0);
    CHECK(z.g == 0);
    CHECK(z.Fx == 0);
    CHECK(z.Fz == 0);
    CHECK(z.Gy == 0);
  }
}

TEST_CASE("antiferro run: invariants, oracle and mean-field energy") {
  const AntiferroSpec s = spec(CrystalAxis::x, 3, -2);
  AntiferroOptions o;
  o.t_end = units::fs_to_au(1000);
  o.full_diagnostic = true;
  const AntiferroRun r = run_antiferro(s, o);
  for (const char* n : {"Mx", "My", "Lz"}) {
    double m = 0;
    for (double v : r.full.col(n)) m = std::max(m, std::abs(v));
    CHECK(m < 1e-8);
  }
  CHECK(r.post_energy_drift < 1e-8);
  double ex = 0;
  for (double v : r.full.col("max_excluded")) ex = std::max(ex, v);
  CHECK(ex < 1e-10);

  o.mode = ExchangeMode::frozen;
  o.oracle = true;
  o.full_diagnostic = false;
  const AntiferroRun fr = run_antiferro(s, o);
  CHECK(oracle_compare(fr.vars, fr.oracle, 1e-5).pass());

  // the g-scalar is pulse-shaped: it vanishes after the field tail
  const double tail = s.pulse.t0 + field_tail * s.pulse.T;
  double gmax = 0, gtail = 0;
  for (std::size_t k = 0; k < r.fields.grid.count; ++k) {
    const double gv = std::abs(r.fields.gamma(1, static_cast<Eigen::Index>(k)) - r.fields.gamma(2, static_cast<Eigen::Index>(k)));
    gmax = std::max(gmax, gv);
    if (r.fields.grid.t(k) > tail) gtail = std::max(gtail, gv);
  }
  CHECK(gmax > 0);
  CHECK(gtail < 1e-6 * gmax);
}

TEST_CASE("weak exchange, x axis: Mz first moves downward") {
  const AntiferroSpec s = spec(CrystalAxis::x, 0, -2);
  AntiferroOptions o;
  o.t_end = units::fs_to_au(1500);
  const AntiferroRun r = run_antiferro(s, o);
  const auto& mz = r.series.col("Mz");
  double peak = 0;
  for (double v : mz) peak = std::max(peak, std::abs(v));
  REQUIRE(peak > 0);
  double first = 0;
  for (double v : mz)
    if (std::abs(v) > 0.01 * peak) {
      first = v;
      break;
    }
  CHECK(first < 0);
}
