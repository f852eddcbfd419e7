#include "ifesim/effective_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ifesim {

namespace {

Eigen::VectorXd interp(const Eigen::MatrixXd& m, const TimeGrid& g, double t) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.rows());
  if (g.count == 0 || t < g.t_start || t > g.t_end()) return out;
  const double x = (t - g.t_start) / g.dt;
  auto k = static_cast<std::size_t>(std::floor(x));
  if (k >= g.count - 1) return m.col(static_cast<Eigen::Index>(g.count - 1));
  const double w = x - static_cast<double>(k);
  return (1 - w) * m.col(static_cast<Eigen::Index>(k)) + w * m.col(static_cast<Eigen::Index>(k + 1));
}

constexpr double vanishing = 1e-14;

}  // namespace

Eigen::VectorXd EffectiveFields::nu_at(double t) const { return interp(nu, grid, t); }
Eigen::VectorXd EffectiveFields::gamma_at(double t) const { return interp(gamma, grid, t); }

Eigen::VectorXcd EffectiveFields::Y_column(std::size_t k) const {
  const auto c = static_cast<Eigen::Index>(k);
  return nu.col(c).cast<cplx>() + I * gamma.col(c).cast<cplx>();
}

EffectiveFields compute_fields(const RamanResult& A, const PropagatorFn& U, const Spinor& psi0) {
  const Eigen::Index n = A.A.rows();
  const auto N = static_cast<Eigen::Index>(A.grid.count);
  if (psi0.size() != n) throw std::invalid_argument("compute_fields: dimension mismatch");
  if (N < 3) throw std::invalid_argument("compute_fields: grid too short");
  const double dt = A.grid.dt;
  const double scale = psi0.cwiseAbs().maxCoeff();

  Eigen::MatrixXcd X = A.A;
  for (Eigen::Index a = 0; a < n; ++a) X.row(a) *= psi0[a];

  Eigen::MatrixXcd num(n, N), den(n, N);
  for (Eigen::Index k = 0; k < N; ++k) {
    Eigen::VectorXcd dX;
    if (k == 0)
      dX = (X.col(1) - X.col(0)) / dt;
    else if (k == N - 1)
      dX = (X.col(N - 1) - X.col(N - 2)) / dt;
    else
      dX = (X.col(k + 1) - X.col(k - 1)) / (2 * dt);
    const Operator u = U(A.grid.t(static_cast<std::size_t>(k)));
    num.col(k) = u * dX;
    den.col(k) = u * X.col(k);
  }

  EffectiveFields f;
  f.grid = A.grid;
  f.nu = Eigen::MatrixXd::Zero(n, N);
  f.gamma = Eigen::MatrixXd::Zero(n, N);
  f.active.assign(static_cast<std::size_t>(n), true);
  double min_den = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < n; ++a) {
    const double peak = den.row(a).cwiseAbs().maxCoeff();
    if (peak < vanishing) {  // component never populated: excluded from Y and the drive sums
      f.active[static_cast<std::size_t>(a)] = false;
      continue;
    }
    for (Eigen::Index k = 0; k < N; ++k) {
      min_den = std::min(min_den, std::abs(den(a, k)) / scale);
      const cplx y = num(a, k) / den(a, k);
      f.nu(a, k) = y.real();
      f.gamma(a, k) = y.imag();
    }
  }
  f.min_denominator = min_den;
  if (min_den < denominator_guard) throw std::runtime_error("perturbation too strong: effective-field denominator below guard");
  return f;
}

EffectiveFields compute_fields(const RamanResult& A, const Evolution& ground, const Spinor& psi0) {
  return compute_fields(A, [&ground](double t) { return ground.at(t); }, psi0);
}

Operator build_HJ(const Eigen::VectorXd& nu, const Eigen::VectorXd& gamma, const Spinor& psi) {
  const int n = static_cast<int>(psi.size());
  if (nu.size() != n || gamma.size() != n) throw std::invalid_argument("build_HJ: dimension mismatch");
  Operator H = Operator::Zero(n, n);
  for (int a = 0; a < n; ++a) H(a, a) = -gamma[a];
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const cplx z = std::conj(psi[a]) * psi[b];
      const double np = 2 * z.real(), nm = 2 * z.imag();
      const double w = 0.5 * (nu[a] - nu[b]);
      H += w * (nm * build_N(a, b, 1, n) - np * build_N(a, b, -1, n));
    }
  }
  return H;
}

Eigen::MatrixXd commutator_matrix(const Operator& H) {
  const int n = static_cast<int>(H.rows());
  const auto basis = n_basis(n);
  Eigen::MatrixXd K(basis.size(), basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Operator N = build_N(basis[i], n);
    K.row(static_cast<Eigen::Index>(i)) = n_coefficients(-I * commutator(N, H)).transpose();
  }
  return K;
}

Eigen::VectorXd eom_rhs(const Eigen::VectorXd& nu, const Eigen::VectorXd& gamma, const Eigen::VectorXd& n,
                        const Operator& Hm, const std::vector<bool>& active) {
  return eom_rhs_K(nu, gamma, n, commutator_matrix(Hm), active);
}

Eigen::VectorXd eom_rhs_K(const Eigen::VectorXd& nu, const Eigen::VectorXd& gamma, const Eigen::VectorXd& n,
                          const Eigen::MatrixXd& K, const std::vector<bool>& active) {
  const int dim = static_cast<int>(nu.size());
  const auto basis = n_basis(dim);
  if (n.size() != static_cast<Eigen::Index>(basis.size()) || gamma.size() != dim || K.rows() != n.size() ||
      K.cols() != n.size())
    throw std::invalid_argument("eom_rhs: dimension mismatch");
  auto on = [&](int a) { return active.empty() || active[static_cast<std::size_t>(a)]; };
  Eigen::VectorXd v = nu, g = gamma;
  for (int a = 0; a < dim; ++a)
    if (!on(a)) v[a] = g[a] = 0;

  double S = 0;
  for (int a = 0; a < dim; ++a) S -= 2 * v[a] * n[n_basis_position({a, a, 1}, dim)];

  Eigen::VectorXd d = K * n;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& k = basis[i];
    const auto ii = static_cast<Eigen::Index>(i);
    d[ii] += (S + v[k.a] + v[k.b]) * n[ii];
    if (!k.diagonal()) d[ii] += k.sign * (g[k.a] - g[k.b]) * n[n_basis_position({k.a, k.b, -k.sign}, dim)];
  }
  return d;
}

double field_tail_ratio(const EffectiveFields& f, const PulseSpec& p) {
  const double peak = std::max(f.nu.cwiseAbs().maxCoeff(), f.gamma.cwiseAbs().maxCoeff());
  if (peak == 0) return 0;
  double tail = 0;
  for (std::size_t k = 0; k < f.grid.count; ++k) {
    if (f.grid.t(k) < p.t0 + field_tail * p.T) continue;
    const auto c = static_cast<Eigen::Index>(k);
    tail = std::max({tail, f.nu.col(c).cwiseAbs().maxCoeff(), f.gamma.col(c).cwiseAbs().maxCoeff()});
  }
  return tail / peak;
}

}  // namespace ifesim
