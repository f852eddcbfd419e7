#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ifesim {

using cplx = std::complex<double>;
using Spinor = Eigen::VectorXcd;
using Operator = Eigen::MatrixXcd;

inline constexpr cplx I{0.0, 1.0};

struct AngularMomentumSet {
  double J = 0;
  Operator Jx, Jy, Jz;
  int dim() const { return static_cast<int>(Jz.rows()); }
};

// Basis ordered Jz = J, J-1, ..., -J. Rejects J that is not a non-negative half-integer.
AngularMomentumSet build_angular_momentum(double J);

// One element of the Hermitian transition basis. Indices are 0-based, a <= b.
// sign = +1: ones at (a,b) and (b,a); sign = -1: -i at (a,b), +i at (b,a) (needs b > a).
// a == b with sign = +1 is the diagonal projector N_a.
struct NIndex {
  int a = 0;
  int b = 0;
  int sign = 1;
  bool diagonal() const { return a == b; }
  bool operator==(const NIndex&) const = default;
};

Operator build_N(int a, int b, int sign, int n);
inline Operator build_N(const NIndex& k, int n) { return build_N(k.a, k.b, k.sign, n); }

// All n^2 basis elements: for each a, (a,a,+) then (a,b,+), (a,b,-) for b > a.
std::vector<NIndex> n_basis(int n);
int n_basis_position(const NIndex& k, int n);

// Coefficients c with <O> = sum_k c_k <N_k> for Hermitian O.
Eigen::VectorXd n_coefficients(const Operator& O);
// <N_k> for every basis element, in n_basis order.
Eigen::VectorXd n_expectations(const Spinor& psi);

Operator commutator(const Operator& A, const Operator& B);
cplx expectation(const Spinor& psi, const Operator& O);

double hermiticity_defect(const Operator& H);
double unitarity_defect(const Operator& U);

// exp(-iHt) by Hermitian eigendecomposition.
Operator propagator(const Operator& H, double t);

// Eigendecomposed time-independent Hamiltonian for repeated exp(-iHt) evaluations.
class Evolution {
 public:
  explicit Evolution(const Operator& H);
  Operator at(double t) const;
  Spinor apply(double t, const Spinor& psi) const;
  const Eigen::VectorXd& energies() const { return w_; }
  const Operator& vectors() const { return V_; }
  int dim() const { return static_cast<int>(w_.size()); }

 private:
  Eigen::VectorXd w_;
  Operator V_;
};

inline constexpr double hermitian_tol = 1e-12;

}  // namespace ifesim
