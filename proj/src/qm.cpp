#include "ifesim/qm.hpp"

#include <cmath>

namespace ifesim {

AngularMomentumSet build_angular_momentum(double J) {
  const double twoJ = 2.0 * J;
  if (!(J >= 0) || std::abs(twoJ - std::round(twoJ)) > 1e-12)
    throw std::invalid_argument("angular momentum must be a non-negative half-integer");
  const int n = static_cast<int>(std::round(twoJ)) + 1;
  Operator jp = Operator::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double m = J - k;  // raising |m> -> |m+1> lands in row k-1
    jp(k - 1, k) = std::sqrt(J * (J + 1) - m * (m + 1));
  }
  AngularMomentumSet s;
  s.J = J;
  s.Jx = (jp + jp.adjoint()) / 2.0;
  s.Jy = (jp - jp.adjoint()) / (2.0 * I);
  s.Jz = Operator::Zero(n, n);
  for (int k = 0; k < n; ++k) s.Jz(k, k) = J - k;
  return s;
}

Operator build_N(int a, int b, int sign, int n) {
  if (a < 0 || b >= n || a > b) throw std::invalid_argument("build_N: need 0 <= a <= b < n");
  if (sign != 1 && sign != -1) throw std::invalid_argument("build_N: sign must be +1 or -1");
  if (a == b && sign == -1) throw std::invalid_argument("build_N: diagonal element has no minus part");
  Operator N = Operator::Zero(n, n);
  if (a == b) {
    N(a, a) = 1.0;
  } else if (sign == 1) {
    N(a, b) = 1.0;
    N(b, a) = 1.0;
  } else {
    N(a, b) = -I;
    N(b, a) = I;
  }
  return N;
}

std::vector<NIndex> n_basis(int n) {
  std::vector<NIndex> out;
  out.reserve(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a) {
    out.push_back({a, a, 1});
    for (int b = a + 1; b < n; ++b) {
      out.push_back({a, b, 1});
      out.push_back({a, b, -1});
    }
  }
  return out;
}

int n_basis_position(const NIndex& k, int n) {
  // rows before a contribute 1 + 2(n-1-a') entries each
  int pos = 0;
  for (int a = 0; a < k.a; ++a) pos += 1 + 2 * (n - 1 - a);
  if (k.a == k.b) return pos;
  return pos + 1 + 2 * (k.b - k.a - 1) + (k.sign == 1 ? 0 : 1);
}

Eigen::VectorXd n_coefficients(const Operator& O) {
  const int n = static_cast<int>(O.rows());
  const auto basis = n_basis(n);
  Eigen::VectorXd c(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& k = basis[i];
    if (k.diagonal())
      c[i] = O(k.a, k.a).real();
    else if (k.sign == 1)
      c[i] = O(k.a, k.b).real();
    else
      c[i] = -O(k.a, k.b).imag();
  }
  return c;
}

Eigen::VectorXd n_expectations(const Spinor& psi) {
  const int n = static_cast<int>(psi.size());
  const auto basis = n_basis(n);
  Eigen::VectorXd v(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& k = basis[i];
    if (k.diagonal()) {
      v[i] = std::norm(psi[k.a]);
    } else {
      // <N_ab+> = 2 Re(P_a* P_b), <N_ab-> = 2 Im(P_a* P_b)
      const cplx z = std::conj(psi[k.a]) * psi[k.b];
      v[i] = k.sign == 1 ? 2.0 * z.real() : 2.0 * z.imag();
    }
  }
  return v;
}

Operator commutator(const Operator& A, const Operator& B) { return A * B - B * A; }

cplx expectation(const Spinor& psi, const Operator& O) {
  if (O.rows() != psi.size() || O.cols() != psi.size())
    throw std::invalid_argument("expectation: dimension mismatch");
  return psi.dot(O * psi);
}

double hermiticity_defect(const Operator& H) { return (H - H.adjoint()).cwiseAbs().maxCoeff(); }

double unitarity_defect(const Operator& U) {
  return (U.adjoint() * U - Operator::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff();
}

Evolution::Evolution(const Operator& H) {
  if (H.rows() != H.cols()) throw std::invalid_argument("Evolution: operator not square");
  if (hermiticity_defect(H) > hermitian_tol)
    throw std::invalid_argument("Evolution: Hamiltonian is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Operator> es(H);
  w_ = es.eigenvalues();
  V_ = es.eigenvectors();
}

Operator Evolution::at(double t) const {
  Eigen::VectorXcd ph(w_.size());
  for (int k = 0; k < w_.size(); ++k) ph[k] = std::exp(-I * (w_[k] * t));
  return V_ * ph.asDiagonal() * V_.adjoint();
}

Spinor Evolution::apply(double t, const Spinor& psi) const {
  Spinor c = V_.adjoint() * psi;
  for (int k = 0; k < w_.size(); ++k) c[k] *= std::exp(-I * (w_[k] * t));
  return V_ * c;
}

Operator propagator(const Operator& H, double t) { return Evolution(H).at(t); }

}  // namespace ifesim
