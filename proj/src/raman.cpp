#include "ifesim/raman.hpp"

#include <cmath>
#include <stdexcept>

#include "ifesim/units.hpp"

namespace ifesim {

void check_grid(const PulseSpec& p, const TimeGrid& g) {
  validate(p);
  if (g.count < 3 || !(g.dt > 0)) throw std::invalid_argument("time grid needs dt > 0 and >= 3 points");
  if (g.dt > 2 * units::pi / p.omega0 / 40)
    throw std::invalid_argument("time grid too coarse for the carrier frequency");
  if (g.t_start > p.t0 - 3 * p.T || g.t_end() < p.t0 + 3 * p.T)
    throw std::invalid_argument("time grid must span at least t0 +- 3T");
}

Eigen::MatrixXcd cumulative_trapezoid(const Eigen::MatrixXcd& f, double dt) {
  Eigen::MatrixXcd out(f.rows(), f.cols());
  if (f.cols() == 0) return out;
  out.col(0).setZero();
  for (Eigen::Index k = 1; k < f.cols(); ++k) out.col(k) = out.col(k - 1) + 0.5 * dt * (f.col(k) + f.col(k - 1));
  return out;
}

void finish_tail(RamanResult& r, const PulseSpec& p) {
  const double t_tail = p.t0 + tail_start * p.T;
  const Eigen::Index last = r.A.cols() - 1;
  double change = 0;
  for (Eigen::Index k = 0; k <= last; ++k) {
    if (r.grid.t(static_cast<std::size_t>(k)) < t_tail) continue;
    for (Eigen::Index a = 0; a < r.A.rows(); ++a) {
      const double ref = std::abs(r.A(a, last));
      if (ref == 0) continue;
      change = std::max(change, std::abs(r.A(a, k) - r.A(a, last)) / ref);
    }
  }
  r.tail_change = change;
  r.converged_tail = change < tail_tol;
}

RamanResult single_spin_A(const PulseSpec& p, const std::vector<IntermediateLevel>& levels, double B,
                          const TimeGrid& g) {
  check_grid(p, g);
  if (levels.empty()) throw std::invalid_argument("single_spin_A: no intermediate levels");
  const auto N = static_cast<Eigen::Index>(g.count);

  Eigen::VectorXd F(N);
  for (Eigen::Index k = 0; k < N; ++k) F[k] = carrier_field(p, g.t(static_cast<std::size_t>(k)));

  Eigen::MatrixXcd drive = Eigen::MatrixXcd::Zero(2, N);
  Eigen::MatrixXcd inner_f(1, N);
  for (const auto& lv : levels) {
    for (Eigen::Index k = 0; k < N; ++k) {
      const double t = g.t(static_cast<std::size_t>(k));
      inner_f(0, k) = std::exp(I * (lv.energy * t - 0.5 * B * t)) * F[k];
    }
    const Eigen::MatrixXcd inner = cumulative_trapezoid(inner_f, g.dt);
    for (Eigen::Index k = 0; k < N; ++k) {
      const double t = g.t(static_cast<std::size_t>(k));
      const cplx G = std::exp(-I * (lv.energy * t)) * F[k] * inner(0, k);
      drive(0, k) += lv.weight_up * G;
      drive(1, k) += lv.weight_down * G;
    }
  }
  // outer factor exp(-iB Sx t')
  for (Eigen::Index k = 0; k < N; ++k) {
    const double th = 0.5 * B * g.t(static_cast<std::size_t>(k));
    const cplx c = std::cos(th), s = -I * std::sin(th);
    const cplx u = drive(0, k), d = drive(1, k);
    drive(0, k) = c * u + s * d;
    drive(1, k) = s * u + c * d;
  }
  const double pref = (p.E / p.omega0) * (p.E / p.omega0);
  RamanResult r;
  r.grid = g;
  r.A = pref * cumulative_trapezoid(drive, g.dt);
  r.A.array() += 1.0;
  finish_tail(r, p);
  return r;
}

Eigen::MatrixXd dipole_D() {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(6, 4);
  D(0, 0) = -std::sqrt(2.0 / 3.0);
  D(1, 1) = -std::sqrt(1.0 / 5.0);
  D(2, 2) = -std::sqrt(1.0 / 10.0);
  D(3, 3) = -std::sqrt(1.0 / 30.0);
  return D;
}

Eigen::MatrixXcd antiferro_C(const PulseSpec& p, const Evolution& ground, const Evolution& excited,
                             const Spinor& psi0, double d0, const TimeGrid& g) {
  check_grid(p, g);
  if (ground.dim() != 4 || excited.dim() != 6 || psi0.size() != 4)
    throw std::invalid_argument("antiferro_C: expected 4-dim ground and 6-dim excited spaces");
  const auto N = static_cast<Eigen::Index>(g.count);
  // work in the eigenbases of both Hamiltonians: M = Ve^dag D V1
  const Eigen::MatrixXcd M = excited.vectors().adjoint() * dipole_D().cast<cplx>() * ground.vectors();
  const Eigen::VectorXcd w = ground.vectors().adjoint() * psi0;
  const Eigen::VectorXd& lg = ground.energies();
  const Eigen::VectorXd& le = excited.energies();

  Eigen::MatrixXcd f(6, N);
  Eigen::VectorXcd tmp(4);
  for (Eigen::Index k = 0; k < N; ++k) {
    const double t = g.t(static_cast<std::size_t>(k));
    const double F = carrier_field(p, t);
    for (int a = 0; a < 4; ++a) tmp[a] = std::exp(-I * (lg[a] * t)) * w[a];
    f.col(k) = M * tmp;
    for (int e = 0; e < 6; ++e) f(e, k) *= F * std::exp(I * (le[e] * t));
  }
  const Eigen::MatrixXcd s = cumulative_trapezoid(f, g.dt);

  Eigen::MatrixXcd h(4, N);
  Eigen::VectorXcd se(6);
  const Eigen::MatrixXcd Mh = M.adjoint();
  for (Eigen::Index k = 0; k < N; ++k) {
    const double t = g.t(static_cast<std::size_t>(k));
    const double F = carrier_field(p, t);
    for (int e = 0; e < 6; ++e) se[e] = std::exp(-I * (le[e] * t)) * s(e, k);
    h.col(k) = Mh * se;
    for (int a = 0; a < 4; ++a) h(a, k) *= F * std::exp(I * (lg[a] * t));
  }
  return p.E * p.E * d0 * d0 * (ground.vectors() * cumulative_trapezoid(h, g.dt));
}

RamanResult antiferro_A(const Eigen::MatrixXcd& C, const Spinor& psi0, const PulseSpec& p, const TimeGrid& g) {
  if (C.rows() != psi0.size() || static_cast<std::size_t>(C.cols()) != g.count)
    throw std::invalid_argument("antiferro_A: shape mismatch");
  RamanResult r;
  r.grid = g;
  r.A = Eigen::MatrixXcd::Zero(C.rows(), C.cols());
  for (Eigen::Index a = 0; a < C.rows(); ++a) {
    if (psi0[a] == cplx(0)) {
      r.leakage = std::max(r.leakage, C.row(a).cwiseAbs().maxCoeff());
      continue;
    }
    r.A.row(a) = (1.0 - C.row(a).array() / psi0[a]).matrix();
  }
  finish_tail(r, p);
  return r;
}

}  // namespace ifesim
