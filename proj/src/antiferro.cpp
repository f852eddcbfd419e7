#include "ifesim/antiferro.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ifesim/oracle.hpp"

namespace ifesim {

void validate(const AntiferroSpec& s) {
  validate(s.pulse);
  if (s.axis == CrystalAxis::z && !(s.Delta > 0)) throw std::invalid_argument("axis z requires Delta > 0");
  if (s.axis == CrystalAxis::x && !(s.Delta < 0)) throw std::invalid_argument("axis x requires Delta < 0");
  if (!(s.Jex >= 0)) throw std::invalid_argument("exchange constant must be >= 0");
  if (!(s.eps_ex > 0)) throw std::invalid_argument("excited-term energy must be > 0");
  if (!std::isfinite(s.Delta_e) || !std::isfinite(s.d0)) throw std::invalid_argument("non-finite parameter");
}

Operator crystal_field(CrystalAxis axis, double Delta, double J) {
  const auto a = build_angular_momentum(J);
  const Operator& Ja = axis == CrystalAxis::z ? a.Jz : a.Jx;
  return Delta * (3 * Ja * Ja - J * (J + 1) * Operator::Identity(a.dim(), a.dim()));
}

namespace {

const AngularMomentumSet& j32() {
  static const AngularMomentumSet a = build_angular_momentum(1.5);
  return a;
}

Spinor flip(const Spinor& p) {
  Spinor q = p;
  q[1] = -q[1];
  q[3] = -q[3];
  return q;
}

}  // namespace

GroundState ground_state(const AntiferroSpec& s) {
  validate(s);
  const auto& J = j32();
  GroundState g;
  Spinor psi(4);
  if (s.axis == CrystalAxis::x) {
    g.c = 1 / (2 * std::sqrt(2.0));
    g.d = std::sqrt(3.0) / (2 * std::sqrt(2.0));
    psi << g.c, g.d, g.d, g.c;
  } else {
    const Operator cr = crystal_field(s.axis, s.Delta, 1.5);
    double jx = 1.5;
    bool done = false;
    for (int it = 1; it <= 1000; ++it) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((cr - s.Jex * jx * J.Jx).real());
      const double gap = es.eigenvalues()[1] - es.eigenvalues()[0];
      if (gap < 1e-12 * std::max(1.0, std::abs(s.Delta)))
        throw std::runtime_error("ground_state: degenerate lowest level, no unique (c,d,d,c) state");
      Eigen::VectorXd v = es.eigenvectors().col(0);
      if (v[0] < 0) v = -v;
      psi = v.cast<cplx>();
      const double next = expectation(psi, J.Jx).real();
      g.iterations = it;
      if (std::abs(next - jx) < 1e-12) {
        jx = next;
        done = true;
        break;
      }
      jx = next;
    }
    if (!done) throw std::runtime_error("ground_state: self-consistency did not converge in 1000 iterations");
    if (std::abs(psi[0] - psi[3]) > 1e-10 || std::abs(psi[1] - psi[2]) > 1e-10 || psi[0].real() < 0 ||
        psi[1].real() < 0)
      throw std::runtime_error("ground_state: lowest state is not of the (c,d,d,c) form");
    g.c = psi[0].real();
    g.d = psi[1].real();
    psi << g.c, g.d, g.d, g.c;
  }
  g.psi1 = psi;
  g.psi2 = flip(psi);
  g.Jx1 = expectation(g.psi1, J.Jx).real();
  g.J0 = s.Jex * g.Jx1;
  return g;
}

Operator sublattice_hamiltonian(const AntiferroSpec& s, const GroundState& g, int sublattice) {
  if (sublattice != 1 && sublattice != 2) throw std::invalid_argument("sublattice must be 1 or 2");
  const double sign = sublattice == 1 ? -1.0 : 1.0;
  return crystal_field(s.axis, s.Delta, 1.5) + sign * g.J0 * j32().Jx;
}

ExcitedScheme excited_scheme(const AntiferroSpec& s) {
  ExcitedScheme e;
  e.H = s.eps_ex * Operator::Identity(6, 6) + crystal_field(s.axis, s.Delta_e, 2.5);
  Eigen::SelfAdjointEigenSolver<Operator> es(e.H);
  const double tol = 1e-9 * std::max(std::abs(s.Delta_e), 1e-12);
  for (int i = 0; i < 6; ++i) {
    const double v = es.eigenvalues()[i];
    if (e.levels.empty() || v - e.levels.back() > tol) e.levels.push_back(v);
  }
  return e;
}

// ---- m/l variables ----

const std::array<std::string, ml_count>& ml_names() {
  static const std::array<std::string, ml_count> n = {"l12p", "l12m", "l23p", "l23m", "l34p", "l34m",
                                                       "l14p", "l14m", "m13p", "m13m", "m24p", "m24m",
                                                       "m1",   "m2",   "m3",   "m4"};
  return n;
}

NIndex ml_index(int var) {
  static const NIndex idx[ml_count] = {{0, 1, 1}, {0, 1, -1}, {1, 2, 1}, {1, 2, -1}, {2, 3, 1}, {2, 3, -1},
                                       {0, 3, 1}, {0, 3, -1}, {0, 2, 1}, {0, 2, -1}, {1, 3, 1}, {1, 3, -1},
                                       {0, 0, 1}, {1, 1, 1},  {2, 2, 1}, {3, 3, 1}};
  if (var < 0 || var >= ml_count) throw std::out_of_range("ml_index");
  return idx[var];
}

bool ml_is_l(int var) { return var <= l14m; }

double ml_weight(int a) { return (a == 0 || a == 3) ? std::sqrt(3.0) / 2 : 1.0; }

namespace {

double pair_weight(const NIndex& k) { return k.diagonal() ? 1.0 : ml_weight(k.a) * ml_weight(k.b); }

}  // namespace

FullML full_ml(const Eigen::VectorXd& n1, const Eigen::VectorXd& n2) {
  const auto basis = n_basis(4);
  FullML f{Eigen::VectorXd(16), Eigen::VectorXd(16)};
  for (int k = 0; k < 16; ++k) {
    const double w = pair_weight(basis[static_cast<std::size_t>(k)]);
    f.m[k] = w * (n1[k] + n2[k]);
    f.l[k] = w * (n1[k] - n2[k]);
  }
  return f;
}

FullML full_ml(const Spinor& psi1, const Spinor& psi2) { return full_ml(n_expectations(psi1), n_expectations(psi2)); }

void sublattice_expectations(const FullML& f, Eigen::VectorXd& n1, Eigen::VectorXd& n2) {
  const auto basis = n_basis(4);
  n1.resize(16);
  n2.resize(16);
  for (int k = 0; k < 16; ++k) {
    const double w = pair_weight(basis[static_cast<std::size_t>(k)]);
    n1[k] = (f.m[k] + f.l[k]) / (2 * w);
    n2[k] = (f.m[k] - f.l[k]) / (2 * w);
  }
}

MLState ml_from_full(const FullML& f) {
  MLState x{};
  for (int v = 0; v < ml_count; ++v) {
    const int k = n_basis_position(ml_index(v), 4);
    x[static_cast<std::size_t>(v)] = ml_is_l(v) ? f.l[k] : f.m[k];
  }
  return x;
}

std::vector<std::pair<bool, int>> excluded_variables() {
  std::vector<std::pair<bool, int>> out;
  for (const auto& [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {0, 3}})
    for (int sgn : {1, -1}) out.emplace_back(false, n_basis_position({a, b, sgn}, 4));
  for (const auto& [a, b] : std::vector<std::pair<int, int>>{{0, 2}, {1, 3}})
    for (int sgn : {1, -1}) out.emplace_back(true, n_basis_position({a, b, sgn}, 4));
  for (int a = 0; a < 4; ++a) out.emplace_back(true, n_basis_position({a, a, 1}, 4));
  return out;
}

double max_excluded(const FullML& f) {
  double m = 0;
  for (const auto& [is_l, k] : excluded_variables()) m = std::max(m, std::abs(is_l ? f.l[k] : f.m[k]));
  return m;
}

// ---- commutator table ----

namespace {

using Cell = std::vector<MLTerm>;
using Row = std::array<Cell, ml_columns>;

std::array<Row, ml_count> build_table() {
  std::array<Row, ml_count> t;
  // columns: Lx, Ly, Mz, (Mz^2+Lz^2)/2, (Mx^2+Lx^2)/2
  t[l12p] = {Cell{{1, m13m}}, Cell{{1.5, m1}, {-1.5, m2}, {-1, m13p}}, Cell{{-1, l12m}}, Cell{{-2, l12m}},
             Cell{{1, l12m}, {0.75, l23m}, {1, l14m}}};
  t[l12m] = {Cell{{-1.5, m1}, {1.5, m2}, {-1, m13p}}, Cell{{-1, m13m}}, Cell{{1, l12p}}, Cell{{2, l12p}},
             Cell{{-1, l12p}, {0.75, l23p}, {-1, l14p}}};
  t[l23p] = {Cell{{-1, m13m}, {1, m24m}}, Cell{{2, m2}, {-2, m3}, {1, m13p}, {-1, m24p}}, Cell{{-1, l23m}}, Cell{},
             Cell{{-1, l12m}, {1, l34m}}};
  t[l23m] = {Cell{{-2, m2}, {2, m3}, {1, m13p}, {-1, m24p}}, Cell{{1, m13m}, {-1, m24m}}, Cell{{1, l23p}}, Cell{},
             Cell{{-1, l12p}, {1, l34p}}};
  t[l34p] = {Cell{{-1, m24m}}, Cell{{1.5, m3}, {-1.5, m4}, {1, m24p}}, Cell{{-1, l34m}}, Cell{{2, l34m}},
             Cell{{-0.75, l23m}, {-1, l34m}, {-1, l14m}}};
  t[l34m] = {Cell{{-1.5, m3}, {1.5, m4}, {1, m24p}}, Cell{{1, m24m}}, Cell{{1, l34p}}, Cell{{-2, l34p}},
             Cell{{-0.75, l23p}, {1, l34p}, {1, l14p}}};
  t[l14p] = {Cell{{0.75, m13m}, {-0.75, m24m}}, Cell{{0.75, m13p}, {-0.75, m24p}}, Cell{{-3, l14m}}, Cell{},
             Cell{{0.75, l12m}, {-0.75, l34m}}};
  t[l14m] = {Cell{{-0.75, m13p}, {0.75, m24p}}, Cell{{0.75, m13m}, {-0.75, m24m}}, Cell{{3, l14p}}, Cell{},
             Cell{{-0.75, l12p}, {0.75, l34p}}};
  t[m13p] = {Cell{{1, l12m}, {1, l14m}, {-0.75, l23m}}, Cell{{1, l12p}, {-1, l14p}, {-0.75, l23p}},
             Cell{{-2, m13m}}, Cell{{-2, m13m}}, Cell{{1, m13m}}};
  t[m13m] = {Cell{{-1, l12p}, {-1, l14p}, {0.75, l23p}}, Cell{{1, l12m}, {-1, l14m}, {-0.75, l23m}},
             Cell{{2, m13p}}, Cell{{2, m13p}}, Cell{{-1.5, m1}, {-1, m13p}, {1.5, m3}}};
  t[m24p] = {Cell{{0.75, l23m}, {-1, l14m}, {-1, l34m}}, Cell{{1, l14p}, {0.75, l23p}, {-1, l34p}},
             Cell{{-2, m24m}}, Cell{{2, m24m}}, Cell{{-1, m24m}}};
  t[m24m] = {Cell{{-0.75, l23p}, {1, l14p}, {1, l34p}}, Cell{{1, l14m}, {0.75, l23m}, {-1, l34m}},
             Cell{{2, m24p}}, Cell{{-2, m24p}}, Cell{{-1.5, m2}, {1.5, m4}, {1, m24p}}};
  t[m1] = {Cell{{1, l12m}}, Cell{{-1, l12p}}, Cell{}, Cell{}, Cell{{1, m13m}}};
  t[m2] = {Cell{{1, l23m}, {-1, l12m}}, Cell{{-1, l23p}, {1, l12p}}, Cell{}, Cell{}, Cell{{1, m24m}}};
  t[m3] = {Cell{{-1, l23m}, {1, l34m}}, Cell{{1, l23p}, {-1, l34p}}, Cell{}, Cell{}, Cell{{-1, m13m}}};
  t[m4] = {Cell{{-1, l34m}}, Cell{{1, l34p}}, Cell{}, Cell{}, Cell{{-1, m24m}}};
  return t;
}

const std::array<Row, ml_count>& table() {
  static const auto t = build_table();
  return t;
}

}  // namespace

const std::vector<MLTerm>& commutator_cell(int var, int column) {
  if (var < 0 || var >= ml_count || column < 0 || column >= ml_columns) throw std::out_of_range("commutator_cell");
  return table()[static_cast<std::size_t>(var)][static_cast<std::size_t>(column)];
}

double eval_cell(int var, int column, const MLState& x) {
  double s = 0;
  for (const auto& t : commutator_cell(var, column)) s += t.coef * x[static_cast<std::size_t>(t.var)];
  return s;
}

MLVectors ml_vectors(const MLState& x) {
  MLVectors v{};
  v.Lx = x[l12p] + x[l23p] + x[l34p];
  v.Ly = x[l12m] + x[l23m] + x[l34m];
  v.Mz = 1.5 * x[m1] + 0.5 * x[m2] - 0.5 * x[m3] - 1.5 * x[m4];
  return v;
}

MLVectors ml_vectors(const FullML& f) {
  auto pos = [](int a, int b, int s) { return n_basis_position({a, b, s}, 4); };
  MLVectors v{};
  v.Mx = f.m[pos(0, 1, 1)] + f.m[pos(1, 2, 1)] + f.m[pos(2, 3, 1)];
  v.My = f.m[pos(0, 1, -1)] + f.m[pos(1, 2, -1)] + f.m[pos(2, 3, -1)];
  v.Lx = f.l[pos(0, 1, 1)] + f.l[pos(1, 2, 1)] + f.l[pos(2, 3, 1)];
  v.Ly = f.l[pos(0, 1, -1)] + f.l[pos(1, 2, -1)] + f.l[pos(2, 3, -1)];
  const double w[4] = {1.5, 0.5, -0.5, -1.5};
  for (int a = 0; a < 4; ++a) {
    v.Mz += w[a] * f.m[pos(a, a, 1)];
    v.Lz += w[a] * f.l[pos(a, a, 1)];
  }
  return v;
}

namespace {

double drive_sum(const MLState& x, const Eigen::VectorXd& nu) {
  double S = 0;
  for (int a = 0; a < 4; ++a) S -= nu[a] * x[static_cast<std::size_t>(m1 + a)];
  return S;
}

int partner(int var) { return var <= m24m ? var ^ 1 : var; }

}  // namespace

MLState antiferro_eom_rhs(const MLState& x, const Eigen::VectorXd& nu, const Eigen::VectorXd& gamma,
                          const AntiferroSpec& s, ExchangeMode mode, const MLVectors& frozen) {
  if (nu.size() != 4 || gamma.size() != 4) throw std::invalid_argument("antiferro_eom_rhs: needs four fields");
  const MLVectors v = mode == ExchangeMode::live ? ml_vectors(x) : frozen;
  const double cx = -0.5 * s.Jex * v.Lx, cy = -0.5 * s.Jex * v.Ly, cz = 0.5 * s.Jex * v.Mz;
  const double ccr = 3 * s.Delta;
  const int crys = s.axis == CrystalAxis::z ? colZ2 : colX2;
  const double S = drive_sum(x, nu);

  MLState d{};
  for (int r = 0; r < ml_count; ++r) {
    const NIndex k = ml_index(r);
    const auto rr = static_cast<std::size_t>(r);
    double v_r = (S + nu[k.a] + nu[k.b]) * x[rr];
    if (!k.diagonal()) v_r += k.sign * (gamma[k.a] - gamma[k.b]) * x[static_cast<std::size_t>(partner(r))];
    v_r += cx * eval_cell(r, colLx, x) + cy * eval_cell(r, colLy, x) + cz * eval_cell(r, colMz, x) +
           ccr * eval_cell(r, crys, x);
    d[rr] = v_r;
  }
  return d;
}

MLDrivers ml_drivers(const MLState& x, const Eigen::VectorXd& nu, const Eigen::VectorXd& gamma) {
  MLDrivers dr;
  const double S = drive_sum(x, nu);
  dr.F0 = S + nu[1] + nu[2];
  dr.g = gamma[1] - gamma[2];
  dr.Fx = (nu[0] - nu[2]) * x[l12p] + (nu[3] - nu[1]) * x[l34p];
  dr.Fy = (nu[0] - nu[2]) * x[l12m] + (nu[3] - nu[1]) * x[l34m];
  dr.Gx = (gamma[0] - 2 * gamma[1] + gamma[2]) * x[l12m] + (-gamma[1] + 2 * gamma[2] - gamma[3]) * x[l34m];
  dr.Gy = (gamma[0] - 2 * gamma[1] + gamma[2]) * x[l12p] + (-gamma[1] + 2 * gamma[2] - gamma[3]) * x[l34p];
  // sum m = 2 here, so the constant is nu2 - nu3
  dr.Fz = (nu[1] - nu[2]) + (3 * nu[0] - 2 * nu[1] - nu[2]) * x[m1] +
          (nu[1] + 2 * nu[2] - 3 * nu[3]) * x[m4];
  return dr;
}

double mean_field_energy(const AntiferroSpec& s, const MLState& x) {
  const MLVectors v = ml_vectors(x);
  const double exch = s.Jex * (v.Mz * v.Mz - v.Lx * v.Lx - v.Ly * v.Ly) / 4;
  static const auto basis = n_basis(4);
  const Eigen::VectorXd c = n_coefficients(crystal_field(s.axis, s.Delta, 1.5));
  double cr = 0;
  for (int v_ = 0; v_ < ml_count; ++v_) {
    if (ml_is_l(v_)) continue;
    const NIndex k = ml_index(v_);
    cr += c[n_basis_position(k, 4)] * x[static_cast<std::size_t>(v_)] / pair_weight(k);
  }
  return exch + cr;
}

MLState initial_state(const GroundState& g) { return ml_from_full(full_ml(g.psi1, g.psi2)); }

namespace {

using FieldAt = std::pair<Eigen::VectorXd, Eigen::VectorXd>;

MLState add(const MLState& a, double h, const MLState& k) {
  MLState r;
  for (int i = 0; i < ml_count; ++i) r[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] + h * k[static_cast<std::size_t>(i)];
  return r;
}

void close_m4(MLState& x) { x[m4] = 2 - x[m1] - x[m2] - x[m3]; }

MLState rk4_step(const MLState& x, double h, const FieldAt& f0, const FieldAt& fm, const FieldAt& f1,
                 const AntiferroSpec& s, ExchangeMode mode, const MLVectors& frozen) {
  auto rhs = [&](const MLState& y, const FieldAt& f) {
    MLState yy = y;
    close_m4(yy);
    return antiferro_eom_rhs(yy, f.first, f.second, s, mode, frozen);
  };
  const MLState k1 = rhs(x, f0);
  const MLState k2 = rhs(add(x, h / 2, k1), fm);
  const MLState k3 = rhs(add(x, h / 2, k2), fm);
  const MLState k4 = rhs(add(x, h, k3), f1);
  MLState y;
  for (std::size_t i = 0; i < ml_count; ++i) y[i] = x[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  close_m4(y);
  return y;
}

// 32-variable system: both sublattices in the full N basis with live or frozen exchange fields.
struct FullSystem {
  const AntiferroSpec& s;
  ExchangeMode mode;
  Eigen::MatrixXd Kcr, Kx, Ky, Kz;
  Eigen::VectorXd cx, cy, cz;
  Eigen::Vector3d frozen1, frozen2;  // exchange partner moments for frozen mode

  FullSystem(const AntiferroSpec& spec, ExchangeMode m, const FullML& f0) : s(spec), mode(m) {
    const auto& J = j32();
    Kcr = commutator_matrix(crystal_field(s.axis, s.Delta, 1.5));
    Kx = commutator_matrix(J.Jx);
    Ky = commutator_matrix(J.Jy);
    Kz = commutator_matrix(J.Jz);
    cx = n_coefficients(J.Jx);
    cy = n_coefficients(J.Jy);
    cz = n_coefficients(J.Jz);
    Eigen::VectorXd n1, n2;
    sublattice_expectations(f0, n1, n2);
    frozen1 = moment(n2);
    frozen2 = moment(n1);
  }
  Eigen::Vector3d moment(const Eigen::VectorXd& n) const { return {cx.dot(n), cy.dot(n), cz.dot(n)}; }

  FullML rhs(const FullML& f, const FieldAt& fld) const {
    Eigen::VectorXd n1, n2;
    sublattice_expectations(f, n1, n2);
    const Eigen::Vector3d h1 = mode == ExchangeMode::live ? moment(n2) : frozen1;
    const Eigen::Vector3d h2 = mode == ExchangeMode::live ? moment(n1) : frozen2;
    const Eigen::MatrixXd K1 = Kcr + s.Jex * (h1[0] * Kx + h1[1] * Ky + h1[2] * Kz);
    const Eigen::MatrixXd K2 = Kcr + s.Jex * (h2[0] * Kx + h2[1] * Ky + h2[2] * Kz);
    return full_ml(eom_rhs_K(fld.first, fld.second, n1, K1), eom_rhs_K(fld.first, fld.second, n2, K2));
  }

  FullML step(const FullML& f, double h, const FieldAt& f0, const FieldAt& fm, const FieldAt& f1) const {
    auto axpy = [](const FullML& a, double c, const FullML& k) { return FullML{a.m + c * k.m, a.l + c * k.l}; };
    const FullML k1 = rhs(f, f0);
    const FullML k2 = rhs(axpy(f, h / 2, k1), fm);
    const FullML k3 = rhs(axpy(f, h / 2, k2), fm);
    const FullML k4 = rhs(axpy(f, h, k3), f1);
    return FullML{f.m + h / 6 * (k1.m + 2 * k2.m + 2 * k3.m + k4.m), f.l + h / 6 * (k1.l + 2 * k2.l + 2 * k3.l + k4.l)};
  }
};

[[noreturn]] void invariant_breach(const std::string& what, double t, const MLVectors& v, double value) {
  std::ostringstream os;
  os.precision(6);
  os << "antiferro invariant breach: " << what << " = " << value << " at t = " << t << " a.u. (Lx=" << v.Lx
     << " Ly=" << v.Ly << " Lz=" << v.Lz << " Mx=" << v.Mx << " My=" << v.My << " Mz=" << v.Mz << ")";
  throw std::runtime_error(os.str());
}

}  // namespace

std::vector<MLState> integrate_free(const AntiferroSpec& s, const MLState& x0, double t_end, double step,
                                    std::vector<double>* times) {
  if (!(step > 0) || !(t_end > 0)) throw std::invalid_argument("integrate_free: step and t_end must be > 0");
  const auto n = static_cast<std::size_t>(std::ceil(t_end / step));
  const double h = t_end / static_cast<double>(n);
  const FieldAt zero{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)};
  std::vector<MLState> out{x0};
  if (times) *times = {0.0};
  MLState x = x0;
  close_m4(x);
  for (std::size_t i = 1; i <= n; ++i) {
    x = rk4_step(x, h, zero, zero, zero, s, ExchangeMode::live, {});
    out.push_back(x);
    if (times) times->push_back(static_cast<double>(i) * h);
  }
  return out;
}

AntiferroRun run_antiferro(const AntiferroSpec& s, const AntiferroOptions& opt) {
  validate(s);
  AntiferroRun run;
  run.ground = ground_state(s);
  const GroundState& g = run.ground;
  const Evolution U1(sublattice_hamiltonian(s, g, 1));
  const Evolution Ue(excited_scheme(s).H);
  const TimeGrid grid = TimeGrid::around(s.pulse, opt.span, opt.dt);
  run.raman = antiferro_A(antiferro_C(s.pulse, U1, Ue, g.psi1, s.d0, grid), g.psi1, s.pulse, grid);
  run.fields = compute_fields(run.raman, U1, g.psi1);
  const EffectiveFields& F = run.fields;
  auto field_at = [&](std::size_t k) {
    const auto c = static_cast<Eigen::Index>(k);
    Eigen::VectorXd nu = F.nu.col(c), ga = F.gamma.col(c);
    for (int a = 0; a < 4; ++a)
      if (!F.active[static_cast<std::size_t>(a)]) nu[a] = ga[a] = 0;
    return FieldAt{nu, ga};
  };
  const FieldAt zero{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)};

  // sample times: every second grid node, then the free steps
  std::vector<double> times;
  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < grid.count; k += 2) {
    times.push_back(grid.t(k));
    nodes.push_back(k);
  }
  const double t_grid_end = times.back();
  std::size_t n_free = 0;
  double h_free = 0;
  if (opt.t_end > t_grid_end) {
    n_free = static_cast<std::size_t>(std::ceil((opt.t_end - t_grid_end) / opt.post_step));
    h_free = (opt.t_end - t_grid_end) / static_cast<double>(n_free);
    for (std::size_t i = 1; i <= n_free; ++i) times.push_back(t_grid_end + static_cast<double>(i) * h_free);
  }

  const MLState x0 = initial_state(g);
  const MLVectors frozen = ml_vectors(x0);
  std::vector<std::string> vnames(ml_names().begin(), ml_names().end());
  run.vars = Series(vnames);
  run.series = Series({"Lx", "Ly", "Lz", "Mx", "My", "Mz", "M1x", "M1y", "M1z", "M2x", "M2y", "M2z", "sum_m",
                       "envelope"});
  auto record = [&](double t, const MLState& x) {
    const MLVectors v = ml_vectors(x);
    const double sum = x[m1] + x[m2] + x[m3] + x[m4];
    if (std::abs(sum - 2) > opt.invariant_abort) invariant_breach("sum_m - 2", t, v, sum - 2);
    run.series.push(t, {v.Lx, v.Ly, v.Lz, v.Mx, v.My, v.Mz, (v.Mx + v.Lx) / 2, (v.My + v.Ly) / 2,
                        (v.Mz + v.Lz) / 2, (v.Mx - v.Lx) / 2, (v.My - v.Ly) / 2, (v.Mz - v.Lz) / 2, sum,
                        envelope(s.pulse, t)});
    run.vars.push(t, std::vector<double>(x.begin(), x.end()));
  };

  MLState x = x0;
  record(times[0], x);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    x = rk4_step(x, 2 * grid.dt, field_at(nodes[i - 1]), field_at(nodes[i - 1] + 1), field_at(nodes[i]), s,
                 opt.mode, frozen);
    record(times[i], x);
  }
  for (std::size_t i = 1; i <= n_free; ++i) {
    x = rk4_step(x, h_free, zero, zero, zero, s, opt.mode, frozen);
    record(times[nodes.size() - 1 + i], x);
  }

  // energy drift once the fields are exactly zero
  if (n_free > 0) {
    const std::size_t first = nodes.size() - 1;
    auto state_at = [&](std::size_t i) {
      MLState y;
      for (int v = 0; v < ml_count; ++v) y[static_cast<std::size_t>(v)] = run.vars.cols[static_cast<std::size_t>(v)][i];
      return y;
    };
    const double e0 = mean_field_energy(s, state_at(first));
    double drift = 0;
    for (std::size_t i = first; i < times.size(); ++i)
      drift = std::max(drift, std::abs(mean_field_energy(s, state_at(i)) - e0));
    run.post_energy_drift = drift / std::max(std::abs(e0), 1e-300);
  }

  if (opt.full_diagnostic) {
    const FullML f0 = full_ml(g.psi1, g.psi2);
    const FullSystem sys(s, opt.mode, f0);
    run.full = Series({"max_excluded", "deviation", "Mx", "My", "Lz", "sum_m"});
    auto record_full = [&](std::size_t i, const FullML& f) {
      const MLVectors v = ml_vectors(f);
      const MLState r = ml_from_full(f);
      double dev = 0;
      for (int q = 0; q < ml_count; ++q)
        dev = std::max(dev, std::abs(r[static_cast<std::size_t>(q)] - run.vars.cols[static_cast<std::size_t>(q)][i]));
      double sum = 0;
      for (int a = 0; a < 4; ++a) sum += f.m[n_basis_position({a, a, 1}, 4)];
      const double worst = std::max({std::abs(v.Mx), std::abs(v.My), std::abs(v.Lz)});
      if (worst > opt.invariant_abort) invariant_breach("max(|Mx|,|My|,|Lz|)", times[i], v, worst);
      run.full.push(times[i], {max_excluded(f), dev, v.Mx, v.My, v.Lz, sum});
    };
    FullML f = f0;
    record_full(0, f);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      f = sys.step(f, 2 * grid.dt, field_at(nodes[i - 1]), field_at(nodes[i - 1] + 1), field_at(nodes[i]));
      record_full(i, f);
    }
    for (std::size_t i = 1; i <= n_free; ++i) {
      f = sys.step(f, h_free, zero, zero, zero);
      record_full(nodes.size() - 1 + i, f);
    }
  }

  if (opt.oracle) {
    const Evolution U2(sublattice_hamiltonian(s, g, 2));
    const RamanResult A2 =
        antiferro_A(antiferro_C(s.pulse, U2, Ue, g.psi2, s.d0, grid), g.psi2, s.pulse, grid);
    const SchrodingerOracle o1(run.raman, [&U1](double t) { return U1.at(t); }, g.psi1);
    const SchrodingerOracle o2(A2, [&U2](double t) { return U2.at(t); }, g.psi2);
    std::vector<std::string> names = vnames;
    for (const char* n : {"Lx", "Ly", "Mz"}) names.emplace_back(n);
    run.oracle = Series(names);
    for (double t : times) {
      const MLState y = ml_from_full(full_ml(o1.at(t), o2.at(t)));
      const MLVectors v = ml_vectors(y);
      std::vector<double> row(y.begin(), y.end());
      row.insert(row.end(), {v.Lx, v.Ly, v.Mz});
      run.oracle.push(t, row);
    }
  }
  return run;
}

}  // namespace ifesim
