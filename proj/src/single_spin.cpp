#include "ifesim/single_spin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ifesim/oracle.hpp"
#include "ifesim/units.hpp"

namespace ifesim {

void validate(const SingleSpinSpec& s) {
  validate(s.pulse);
  if (!(s.lambda >= 0)) throw std::invalid_argument("spin-orbit constant must be >= 0");
  if (!(s.eps_2p > s.eps_1s)) throw std::invalid_argument("eps_2p must lie above eps_1s");
  if (!std::isfinite(s.B)) throw std::invalid_argument("B must be finite");
}

double level_cubic(double E, double B, double lambda, double mu, int branch) {
  const double b = -2 * mu * B;  // equals B for mu = -1/2
  const double s = branch;
  const double l = lambda;
  return E * E * E + s * b / 2 * E * E - (3 * l * l / 4 + s * b * l / 2 + b * b / 2) * E +
         (-l * l * l / 4 + l * b * b / 4 - s * 3 * l * l * b / 8);
}

std::vector<Level2p> solve_2p_levels(double B, double lambda, double mu) {
  const auto L = build_angular_momentum(1.0);
  const auto S = build_angular_momentum(0.5);
  const Operator one3 = Operator::Identity(3, 3), one2 = Operator::Identity(2, 2);
  auto kron = [](const Operator& a, const Operator& b) {
    Operator k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
  };
  // basis |Lz, Sz> with Lz = 1, 0, -1 outer and Sz = up, down inner
  const Operator LS = kron(L.Jx, S.Jx) + kron(L.Jy, S.Jy) + kron(L.Jz, S.Jz);
  const Operator H = mu * B * (2 * kron(one3, S.Jx) + kron(L.Jx, one2)) - lambda * LS;
  const Eigen::MatrixXd Hr = H.real();
  if (H.imag().cwiseAbs().maxCoeff() > hermitian_tol) throw std::logic_error("2p Hamiltonian not real");

  // pi rotation about x commutes with H; its two sectors carry the two cubics
  const Operator R = kron(propagator(L.Jx, units::pi), I * propagator(S.Jx, units::pi));
  const Eigen::MatrixXd Pi = R.real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(Pi);

  std::vector<Level2p> out;
  for (int branch : {1, -1}) {
    Eigen::MatrixXd Q(6, 3);
    int c = 0;
    for (int i = 0; i < 6; ++i)
      if (sym.eigenvalues()[i] * -branch > 0) Q.col(c++) = sym.eigenvectors().col(i);
    if (c != 3) throw std::logic_error("2p symmetry sectors are not 3-dimensional");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q.transpose() * Hr * Q);
    const Eigen::MatrixXd V = Q * es.eigenvectors();
    const double scale = std::max({1.0, std::abs(B), lambda});
    for (int j = 0; j < 3; ++j) {
      const double E = es.eigenvalues()[j];
      if (std::abs(level_cubic(E, B, lambda, mu, branch)) > 1e-9 * scale * scale * scale)
        throw std::runtime_error("2p level does not satisfy its cubic");
      Eigen::VectorXd v = V.col(j);
      int lead = 0;
      v.cwiseAbs().maxCoeff(&lead);
      if (v[lead] < 0) v = -v;
      out.push_back({E, branch, v[0], v[1], v[2]});
    }
  }
  return out;
}

Spinor spinor_from_spin(const std::array<double, 3>& S) {
  const double r = std::sqrt(S[0] * S[0] + S[1] * S[1] + S[2] * S[2]);
  if (std::abs(r - 0.5) > 1e-12) throw std::invalid_argument("spin vector must have length 1/2");
  const double th = std::acos(std::clamp(S[2] / r, -1.0, 1.0));
  const double ph = std::atan2(S[1], S[0]);
  Spinor p(2);
  p << std::cos(th / 2), std::exp(I * ph) * std::sin(th / 2);
  return p;
}

std::vector<IntermediateLevel> intermediate_levels(const SingleSpinSpec& s) {
  std::vector<IntermediateLevel> out;
  for (const auto& lv : solve_2p_levels(s.B, s.lambda, s.mu))
    out.push_back({s.eps_2p - s.eps_1s + lv.E, lv.weight_up(), lv.weight_down()});
  return out;
}

Operator spin_propagator(double B, double t) {
  const double th = 0.5 * B * t;
  Operator u(2, 2);
  u << std::cos(th), I * std::sin(th), I * std::sin(th), std::cos(th);
  return u;
}

SpinFields spin_fgh(const EffectiveFields& fields) {
  if (fields.dim() != 2) throw std::invalid_argument("spin_fgh: needs two-level fields");
  SpinFields out;
  const auto N = static_cast<std::size_t>(fields.nu.cols());
  out.f.resize(N);
  out.g.resize(N);
  out.h.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    out.f[k] = 2 * (fields.nu(1, c) - fields.nu(0, c));
    out.g[k] = fields.gamma(1, c) - fields.gamma(0, c);
    out.h[k] = -2.0 / 3.0 * (fields.gamma(1, c) + fields.gamma(0, c));
  }
  return out;
}

std::array<double, 3> spin_rhs(const std::array<double, 3>& S, double f, double g, double B) {
  const auto [x, y, z] = S;
  return {f * x * z - g * y, f * y * z + g * x + B * z, -f * (x * x + y * y) - B * y};
}

namespace {

using Vec3 = std::array<double, 3>;

Vec3 axpy(const Vec3& a, double h, const Vec3& k) { return {a[0] + h * k[0], a[1] + h * k[1], a[2] + h * k[2]}; }

// RK4 on grid nodes with step m*dt (m even). Calls sample(k, S) at every visited node.
template <class Sample>
Vec3 rk4_grid(const TimeGrid& g, const SpinFields& fld, double B, Vec3 S, std::size_t m, Sample&& sample) {
  auto at = [&](const std::vector<double>& v, std::size_t k) { return v.empty() ? 0.0 : v[k]; };
  const double h = static_cast<double>(m) * g.dt;
  std::size_t k = 0;
  sample(k, S);
  for (; k + m < g.count; k += m) {
    const std::size_t mid = k + m / 2, end = k + m;
    const Vec3 k1 = spin_rhs(S, at(fld.f, k), at(fld.g, k), B);
    const Vec3 k2 = spin_rhs(axpy(S, h / 2, k1), at(fld.f, mid), at(fld.g, mid), B);
    const Vec3 k3 = spin_rhs(axpy(S, h / 2, k2), at(fld.f, mid), at(fld.g, mid), B);
    const Vec3 k4 = spin_rhs(axpy(S, h, k3), at(fld.f, end), at(fld.g, end), B);
    for (int i = 0; i < 3; ++i) S[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    sample(end, S);
  }
  return S;
}

// Free RK4 from t_a to t_b with step close to h; calls sample(t, S) after each step.
template <class Sample>
Vec3 rk4_free(double t_a, double t_b, double h, double B, Vec3 S, Sample&& sample) {
  if (!(t_b > t_a)) return S;
  const auto n = static_cast<std::size_t>(std::ceil((t_b - t_a) / h));
  const double step = (t_b - t_a) / static_cast<double>(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const Vec3 k1 = spin_rhs(S, 0, 0, B);
    const Vec3 k2 = spin_rhs(axpy(S, step / 2, k1), 0, 0, B);
    const Vec3 k3 = spin_rhs(axpy(S, step / 2, k2), 0, 0, B);
    const Vec3 k4 = spin_rhs(axpy(S, step, k3), 0, 0, B);
    for (int j = 0; j < 3; ++j) S[j] += step / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    sample(t_a + static_cast<double>(i) * step, S);
  }
  return S;
}

}  // namespace

SpinTrajectory integrate_spin(const SingleSpinSpec& s, const TimeGrid& grid, const SpinFields& fields,
                              const std::array<double, 3>& S0, const SpinRunOptions& opt) {
  if (!fields.f.empty() && (fields.f.size() != grid.count || fields.g.size() != grid.count))
    throw std::invalid_argument("integrate_spin: fields not sampled on the grid");
  if (grid.count < 5) throw std::invalid_argument("integrate_spin: grid too short");

  SpinTrajectory out;
  out.series = Series({"Sx", "Sy", "Sz", "f", "g", "h", "envelope"});
  auto at = [](const std::vector<double>& v, std::size_t k) { return v.empty() ? 0.0 : v[k]; };
  const double t_grid_end = grid.t(((grid.count - 1) / 2) * 2);
  Vec3 S = rk4_grid(grid, fields, s.B, S0, 2, [&](std::size_t k, const Vec3& v) {
    out.series.push(grid.t(k), {v[0], v[1], v[2], at(fields.f, k), at(fields.g, k), at(fields.h, k),
                                envelope(s.pulse, grid.t(k))});
  });
  S = rk4_free(t_grid_end, opt.t_end, opt.post_step, s.B, S, [&](double t, const Vec3& v) {
    out.series.push(t, {v[0], v[1], v[2], 0, 0, 0, envelope(s.pulse, t)});
  });

  if (opt.check_step) {
    // same run with every step doubled; RK4 nodes at 4 dt land on the grid when count-1 is a multiple of 4
    Vec3 C = rk4_grid(grid, fields, s.B, S0, 4, [](std::size_t, const Vec3&) {});
    const std::size_t last4 = ((grid.count - 1) / 4) * 4;
    if (last4 != ((grid.count - 1) / 2) * 2) {
      // finish the half step the coarse run could not take, with step 2dt
      TimeGrid tail{grid.t(last4), grid.dt, grid.count - last4};
      SpinFields tf;
      if (!fields.f.empty()) {
        tf.f.assign(fields.f.begin() + static_cast<long>(last4), fields.f.end());
        tf.g.assign(fields.g.begin() + static_cast<long>(last4), fields.g.end());
      }
      C = rk4_grid(tail, tf, s.B, C, 2, [](std::size_t, const Vec3&) {});
    }
    C = rk4_free(t_grid_end, opt.t_end, 2 * opt.post_step, s.B, C, [](double, const Vec3&) {});
    out.step_change = std::sqrt((C[0] - S[0]) * (C[0] - S[0]) + (C[1] - S[1]) * (C[1] - S[1]) +
                                (C[2] - S[2]) * (C[2] - S[2]));
    if (out.step_change > opt.step_guard)
      throw std::runtime_error("integrate_spin: step halving changes the endpoint by " +
                               std::to_string(out.step_change));
  }
  return out;
}

SpinRun run_single_spin(const SingleSpinSpec& s, const SpinRunOptions& opt, const std::array<double, 3>& S0) {
  validate(s);
  SpinRun r;
  const TimeGrid g = TimeGrid::around(s.pulse, opt.span, opt.dt);
  r.raman = single_spin_A(s.pulse, intermediate_levels(s), s.B, g);
  // outer factor is exp(-iB Sx t); the ground propagator carries the opposite sense
  const double B = s.B;
  r.fields = compute_fields(r.raman, [B](double t) { return spin_propagator(B, t); }, spinor_from_spin(S0));
  r.fgh = spin_fgh(r.fields);
  r.traj = integrate_spin(s, g, r.fgh, S0, opt);
  return r;
}

Series spin_oracle(const SingleSpinSpec& s, const SpinRun& run, const std::array<double, 3>& S0) {
  const double B = s.B;
  const SchrodingerOracle oracle(run.raman, [B](double t) { return spin_propagator(B, t); }, spinor_from_spin(S0));
  const auto S = build_angular_momentum(0.5);
  Series out({"Sx", "Sy", "Sz"});
  for (double t : run.traj.series.t) {
    const Spinor psi = oracle.at(t);
    out.push(t, {expectation(psi, S.Jx).real(), expectation(psi, S.Jy).real(), expectation(psi, S.Jz).real()});
  }
  return out;
}

double crossing_period(const std::vector<double>& t, const std::vector<double>& x, double t_from) {
  std::size_t k0 = 0;
  while (k0 < t.size() && t[k0] < t_from) ++k0;
  if (t.size() - k0 < 3) throw std::invalid_argument("crossing_period: window too short");
  double mean = 0;
  for (std::size_t k = k0; k < t.size(); ++k) mean += x[k];
  mean /= static_cast<double>(t.size() - k0);
  std::vector<double> cross;
  for (std::size_t k = k0 + 1; k < t.size(); ++k) {
    const double a = x[k - 1] - mean, b = x[k] - mean;
    if ((a < 0 && b >= 0) || (a > 0 && b <= 0)) cross.push_back(t[k - 1] + (t[k] - t[k - 1]) * a / (a - b));
  }
  if (cross.size() < 3) throw std::runtime_error("crossing_period: fewer than three crossings");
  return 2 * (cross.back() - cross.front()) / static_cast<double>(cross.size() - 1);
}

double measure_larmor_period(double B, double periods, double step) {
  if (!(B > 0)) throw std::invalid_argument("measure_larmor_period: B must be > 0");
  const double t_end = periods * 2 * units::pi / B;
  Series s({"Sy"});
  rk4_free(0, t_end, step, B, Vec3{0, 0.5, 0}, [&](double t, const Vec3& v) { s.push(t, {v[1]}); });
  return crossing_period(s.t, s.cols[0], 0);
}

SuddenResult sudden_comparison(const SingleSpinSpec& s, const SpinRunOptions& opt, double tau_p_fs,
                               double window_fs) {
  validate(s);
  SuddenResult res;
  res.tau_p = s.pulse.t0 + units::fs_to_au(tau_p_fs);
  const double t_win = s.pulse.t0 + units::fs_to_au(window_fs);
  res.larmor_period = s.B != 0 ? 2 * units::pi / std::abs(s.B) : 0;
  const double t_stop = t_win + (s.B != 0 ? res.larmor_period : units::fs_to_au(100));

  SpinRunOptions o = opt;
  o.t_end = t_stop;
  const TimeGrid g = TimeGrid::around(s.pulse, o.span, o.dt);
  if (res.tau_p > g.t_end() || res.tau_p <= s.pulse.t0)
    throw std::invalid_argument("sudden_comparison: tau_p must lie after the pulse and inside the grid");
  if (t_win <= g.t_end()) throw std::invalid_argument("sudden_comparison: insufficient post-pulse window");

  const SpinRun full = run_single_spin(s, o);

  // baseline: fields computed without B; B switched on at the last RK4 node not after tau_p
  SingleSpinSpec s0 = s;
  s0.B = 0;
  SpinRunOptions o0 = o;
  o0.t_end = 0;
  o0.check_step = false;
  const SpinRun base = run_single_spin(s0, o0);
  const Series& bs = base.traj.series;
  std::size_t kp = 0;
  while (kp + 1 < bs.size() && bs.t[kp + 1] <= res.tau_p) ++kp;
  const std::size_t node = 2 * kp;
  const TimeGrid sub{g.t(node), g.dt, g.count - node};
  SpinFields rest;
  rest.f.assign(base.fgh.f.begin() + static_cast<long>(node), base.fgh.f.end());
  rest.g.assign(base.fgh.g.begin() + static_cast<long>(node), base.fgh.g.end());
  rest.h.assign(base.fgh.h.begin() + static_cast<long>(node), base.fgh.h.end());
  SpinRunOptions oc = o;
  oc.check_step = false;
  const Series after =
      integrate_spin(s, sub, rest, {bs.cols[0][kp], bs.cols[1][kp], bs.cols[2][kp]}, oc).series;

  const Series& fs = full.traj.series;
  if (after.size() > fs.size()) throw std::logic_error("sudden_comparison: sample mismatch");
  const std::size_t shift = fs.size() - after.size();
  double acc = 0;
  std::size_t n = 0;
  for (std::size_t k = shift; k < fs.size(); ++k) {
    if (fs.t[k] < t_win) continue;
    const double phi_full = std::atan2(fs.cols[2][k], fs.cols[1][k]);
    const double phi_base = std::atan2(after.cols[2][k - shift], after.cols[1][k - shift]);
    acc += std::remainder(phi_full - phi_base, 2 * units::pi);
    ++n;
  }
  if (n == 0) throw std::runtime_error("sudden_comparison: empty averaging window");
  res.offset_deg = acc / static_cast<double>(n) * 180 / units::pi;
  return res;
}

}  // namespace ifesim
