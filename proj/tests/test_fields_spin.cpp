#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ifesim/effective_field.hpp"
#include "ifesim/oracle.hpp"
#include "ifesim/single_spin.hpp"
#include "ifesim/units.hpp"

using namespace ifesim;

namespace {

Spinor random_spinor(int n, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Spinor p(n);
  for (int a = 0; a < n; ++a) p[a] = {nd(rng), nd(rng)};
  return p.normalized();
}

Eigen::VectorXd random_vec(int n, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (int a = 0; a < n; ++a) v[a] = nd(rng);
  return v;
}

SingleSpinSpec fig3_spec(double B_T) {
  SingleSpinSpec s;
  s.B = units::tesla_to_au(B_T);
  const double w0 = s.eps_2p - s.eps_1s;
  s.pulse = {amplitude_from_fluence(2.0, 100, units::au_to_eV(w0)), units::fs_to_au(100), w0, 0};
  return s;
}

SpinRunOptions short_run() {
  SpinRunOptions o;
  o.t_end = units::fs_to_au(600);
  return o;
}

}  // namespace

TEST_CASE("H_J matches its entrywise form") {
  std::mt19937 rng(21);
  for (int n : {2, 4}) {
    for (int it = 0; it < 50; ++it) {
      const Spinor p = random_spinor(n, rng);
      const Eigen::VectorXd nu = random_vec(n, rng), ga = random_vec(n, rng);
      // diagonal -gamma_a, off-diagonal (a,b) = i (nu_a - nu_b) P_a conj(P_b)
      Operator direct = Operator::Zero(n, n);
      for (int a = 0; a < n; ++a) {
        direct(a, a) = -ga[a];
        for (int b = a + 1; b < n; ++b) {
          direct(a, b) = I * (nu[a] - nu[b]) * p[a] * std::conj(p[b]);
          direct(b, a) = std::conj(direct(a, b));
        }
      }
      CHECK((build_HJ(nu, ga, p) - direct).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("H_J special cases") {
  std::mt19937 rng(22);
  const Spinor p = random_spinor(4, rng);
  const Eigen::VectorXd nu = Eigen::VectorXd::Constant(4, 0.3), ga = Eigen::VectorXd::Constant(4, -0.7);
  CHECK((build_HJ(nu, ga, p) - 0.7 * Operator::Identity(4, 4)).norm() < 1e-15);

  Spinor q = Spinor::Zero(4);
  q[2] = 1;
  const Operator H = build_HJ(random_vec(4, rng), random_vec(4, rng), q);
  Operator off = H;
  off.diagonal().setZero();
  CHECK(off.norm() == 0);
}

TEST_CASE("equations of motion equal -i<[N, H_J + H_m]> on random samples") {
  std::mt19937 rng(23);
  double worst = 0;
  for (int it = 0; it < 1000; ++it) {
    const int n = it % 2 ? 4 : 2;
    const Spinor p = random_spinor(n, rng);
    const Eigen::VectorXd nu = random_vec(n, rng), ga = random_vec(n, rng);
    Operator Hm = Operator::Random(n, n);
    Hm = (Hm + Hm.adjoint()).eval();
    const Eigen::VectorXd r = eom_rhs(nu, ga, n_expectations(p), Hm);
    const Operator H = build_HJ(nu, ga, p) + Hm;
    const auto basis = n_basis(n);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const double o = (-I * expectation(p, commutator(build_N(basis[k], n), H))).real();
      worst = std::max(worst, std::abs(o - r[static_cast<Eigen::Index>(k)]));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("equations of motion: parallel moment is not rotated") {
  std::mt19937 rng(24);
  Spinor q = Spinor::Zero(4);
  q[1] = 1;
  const auto J = build_angular_momentum(1.5);
  const Eigen::VectorXd r = eom_rhs(random_vec(4, rng), random_vec(4, rng), n_expectations(q), J.Jz);
  CHECK(r.cwiseAbs().maxCoeff() < 1e-15);
  // zero fields: pure Heisenberg motion
  const Spinor p = random_spinor(4, rng);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
  const Eigen::VectorXd h = eom_rhs(z, z, n_expectations(p), J.Jx);
  CHECK((h - commutator_matrix(J.Jx) * n_expectations(p)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("fields vanish without light and without spin-orbit") {
  SingleSpinSpec s = fig3_spec(7);
  SUBCASE("E = 0") {
    s.pulse.E = 0;
    const SpinRun r = run_single_spin(s, short_run());
    CHECK(r.fields.nu.cwiseAbs().maxCoeff() == 0);
    CHECK(r.fields.gamma.cwiseAbs().maxCoeff() == 0);
  }
  SUBCASE("lambda = 0") {
    s.lambda = 0;
    const SpinRun r = run_single_spin(s, short_run());
    for (std::size_t k = 0; k < r.fgh.f.size(); ++k) {
      CHECK(std::abs(r.fgh.f[k]) < 1e-14);
      CHECK(std::abs(r.fgh.g[k]) < 1e-14);
    }
  }
}

TEST_CASE("2p levels at B = 0") {
  const double lam = units::meV_to_au(20);
  const auto lv = solve_2p_levels(0, lam);
  REQUIRE(lv.size() == 6);
  for (int branch : {1, -1}) {
    std::vector<double> e;
    for (const auto& l : lv)
      if (l.branch == branch) e.push_back(l.E);
    std::sort(e.begin(), e.end());
    REQUIRE(e.size() == 3);
    CHECK(e[0] == doctest::Approx(-lam / 2));
    CHECK(e[1] == doctest::Approx(-lam / 2));
    CHECK(e[2] == doctest::Approx(lam));
  }
}

TEST_CASE("2p levels at lambda = 0") {
  const double B = units::tesla_to_au(20);
  const auto lv = solve_2p_levels(B, 0);
  const double r8 = 1 / (2 * std::sqrt(2.0));
  for (int branch : {1, -1}) {
    std::vector<double> e;
    int equal = 0, opposite = 0;
    for (const auto& l : lv) {
      if (l.branch != branch) continue;
      e.push_back(l.E);
      // the minus branch carries the mirrored sign convention; weights are what enter the Raman factor
      const double rel = branch * l.alpha * l.beta;
      if (rel > 0 && std::abs(std::abs(l.alpha) - r8) < 1e-12 && std::abs(std::abs(l.beta) - r8) < 1e-12) ++equal;
      if (rel < 0 && std::abs(std::abs(l.alpha) - 0.5) < 1e-12 && std::abs(std::abs(l.beta) - 0.5) < 1e-12) ++opposite;
    }
    std::sort(e.begin(), e.end());
    const double s = e[0] < -0.75 * B ? 1 : -1;  // {0, B/2, -B} or its mirror image
    std::vector<double> expect{0, s * B / 2, -s * B};
    std::sort(expect.begin(), expect.end());
    for (int i = 0; i < 3; ++i) CHECK(e[i] == doctest::Approx(expect[i]).scale(B));
    CHECK(equal == 2);
    CHECK(opposite == 1);
  }
}

TEST_CASE("2p levels solve their branch cubic") {
  const double lam = units::meV_to_au(20);
  for (double BT : {0.5, 7.0, 20.0, 300.0}) {
    const double B = units::tesla_to_au(BT);
    for (const auto& l : solve_2p_levels(B, lam)) {
      CHECK(std::abs(level_cubic(l.E, B, lam, -0.5, l.branch)) < 1e-12 * std::pow(lam + B, 3));
      CHECK(l.weight_up() >= 0);
      CHECK(l.weight_down() >= 0);
    }
    double up = 0, down = 0;
    for (const auto& l : intermediate_levels(SingleSpinSpec{B, lam}) ) {
      up += l.weight_up;
      down += l.weight_down;
    }
    CHECK(up == doctest::Approx(down));
  }
}

TEST_CASE("spin fields from Y") {
  EffectiveFields f;
  f.grid = TimeGrid{0, 1, 3};
  f.nu = Eigen::MatrixXd::Constant(2, 3, 0.4);
  f.gamma = Eigen::MatrixXd::Constant(2, 3, -0.2);
  const SpinFields s = spin_fgh(f);
  for (int k = 0; k < 3; ++k) {
    CHECK(s.f[static_cast<std::size_t>(k)] == 0);
    CHECK(s.g[static_cast<std::size_t>(k)] == 0);
    CHECK(s.h[static_cast<std::size_t>(k)] == doctest::Approx(2.0 / 3 * 0.4));
  }
  f.nu(1, 1) = 0.9;
  f.gamma(1, 1) = 0.1;
  const SpinFields t = spin_fgh(f);
  CHECK(t.f[1] == doctest::Approx(2 * (0.9 - 0.4)));
  CHECK(t.g[1] == doctest::Approx(0.1 + 0.2));
}

TEST_CASE("spin equations agree with the generic two-level equations") {
  std::mt19937 rng(25);
  const auto S = build_angular_momentum(0.5);
  for (int it = 0; it < 200; ++it) {
    const Spinor p = random_spinor(2, rng);
    const Eigen::VectorXd nu = random_vec(2, rng), ga = random_vec(2, rng);
    const double B = random_vec(1, rng)[0];
    const Eigen::VectorXd n = n_expectations(p);
    const Eigen::VectorXd r = eom_rhs(nu, ga, n, -B * S.Jx);
    const std::array<double, 3> Sv{n[1] / 2, n[2] / 2, (n[0] - n[3]) / 2};
    const auto d = spin_rhs(Sv, 2 * (nu[1] - nu[0]), ga[1] - ga[0], B);
    CHECK(d[0] == doctest::Approx(r[1] / 2).epsilon(1e-12));
    CHECK(d[1] == doctest::Approx(r[2] / 2).epsilon(1e-12));
    CHECK(d[2] == doctest::Approx((r[0] - r[3]) / 2).epsilon(1e-12));
  }
}

TEST_CASE("spinor from spin vector") {
  const auto S = build_angular_momentum(0.5);
  for (std::array<double, 3> v : {std::array<double, 3>{0.5, 0, 0}, {0, 0, -0.5}, {0.3, -0.4, 0}}) {
    const Spinor p = spinor_from_spin(v);
    CHECK(expectation(p, S.Jx).real() == doctest::Approx(v[0]));
    CHECK(expectation(p, S.Jy).real() == doctest::Approx(v[1]));
    CHECK(expectation(p, S.Jz).real() == doctest::Approx(v[2]));
  }
}

TEST_CASE("free spin precession") {
  const double B = units::tesla_to_au(20);
  SingleSpinSpec s = fig3_spec(20);
  s.pulse.E = 0;
  SpinRunOptions o;
  o.t_end = units::fs_to_au(4000);
  SUBCASE("S along x is a fixed point") {
    const SpinRun r = run_single_spin(s, o);
    CHECK(std::abs(r.traj.series.col("Sx").back() - 0.5) < 1e-14);
    CHECK(std::abs(r.traj.series.col("Sz").back()) < 1e-14);
  }
  SUBCASE("S along y precesses at the Larmor period") {
    const SpinTrajectory tr = integrate_spin(s, TimeGrid::around(s.pulse, 6, 0.1), SpinFields{}, {0, 0.5, 0}, o);
    const double P = crossing_period(tr.series.t, tr.series.col("Sy"), tr.series.t.front());
    CHECK(P == doctest::Approx(2 * units::pi / B).epsilon(1e-4));
    CHECK(units::au_to_fs(P) / 1000 == doctest::Approx(1.7862).epsilon(1e-3));
  }
}

TEST_CASE("Heisenberg trajectory matches the Schroedinger oracle") {
  const SingleSpinSpec s = fig3_spec(7);
  const SpinRun r = run_single_spin(s, short_run());
  const Series orc = spin_oracle(s, r);
  const OracleReport rep = oracle_compare(r.traj.series, orc, 1e-6, {"Sx", "Sy", "Sz"});
  CHECK(rep.pass());
  CHECK(orc.col("Sx").front() == doctest::Approx(0.5));
  // norm is preserved by both pictures
  for (std::size_t k = 0; k < orc.size(); k += 97) {
    const double n2 = std::pow(orc.col("Sx")[k], 2) + std::pow(orc.col("Sy")[k], 2) + std::pow(orc.col("Sz")[k], 2);
    CHECK(n2 == doctest::Approx(0.25).epsilon(1e-10));
  }
}

TEST_CASE("oracle comparison") {
  Series a(std::vector<std::string>{"x", "y"});
  a.push(0, {1, 2});
  a.push(1, {3, 4});
  CHECK(oracle_compare(a, a, 0).max_abs == 0);
  Series b = a;
  b.cols[1][1] = 4.5;
  const OracleReport r = oracle_compare(a, b, 0.1);
  CHECK(r.max_abs == doctest::Approx(0.5));
  CHECK_FALSE(r.pass());
  b.t[1] = 2;
  CHECK_THROWS(oracle_compare(a, b, 0.1));
}

TEST_CASE("sudden comparison is exactly zero without a field") {
  const SuddenResult r = sudden_comparison(fig3_spec(0), SpinRunOptions{0.1, 6, units::fs_to_au(3000)});
  CHECK(r.offset_deg == 0);
}

TEST_CASE("end-of-pulse deviation vanishes continuously with spin-orbit coupling") {
  const double tau = units::fs_to_au(200);
  std::vector<double> dev;
  for (double lam_meV : {20.0, 2.0, 0.2, 0.0}) {
    SingleSpinSpec s = fig3_spec(7);
    s.lambda = units::meV_to_au(lam_meV);
    const SpinRun r = run_single_spin(s, short_run());
    const auto& t = r.traj.series.t;
    const auto k = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), tau) - t.begin());
    dev.push_back(std::hypot(r.traj.series.col("Sx")[k] - 0.5, r.traj.series.col("Sy")[k], r.traj.series.col("Sz")[k]));
  }
  for (std::size_t i = 0; i + 1 < dev.size(); ++i) CHECK(dev[i + 1] < dev[i]);
  CHECK(dev.back() < 1e-12);
}

TEST_CASE("step-size guard") {
  SpinRunOptions o = short_run();
  o.dt = 0.4;
  o.step_guard = 1e-14;
  CHECK_THROWS(run_single_spin(fig3_spec(7), o));
}
