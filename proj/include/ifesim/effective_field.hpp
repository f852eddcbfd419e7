#pragma once

#include <functional>
#include <vector>

#include "ifesim/qm.hpp"
#include "ifesim/raman.hpp"

namespace ifesim {

// nu_a(t) = Re Y_a, gamma_a(t) = Im Y_a on the Raman grid (n x count each).
struct EffectiveFields {
  TimeGrid grid;
  Eigen::MatrixXd nu;
  Eigen::MatrixXd gamma;
  std::vector<bool> active;  // false where the initial amplitude vanishes
  double min_denominator = 0;

  int dim() const { return static_cast<int>(nu.rows()); }
  // linear interpolation; zero outside the grid
  Eigen::VectorXd nu_at(double t) const;
  Eigen::VectorXd gamma_at(double t) const;
  Eigen::VectorXcd Y_column(std::size_t k) const;
};

inline constexpr double denominator_guard = 0.1;
// Fields are taken to have decayed from t0 + field_tail*T onward.
inline constexpr double field_tail = 4.0;

// Ground-manifold propagator as a function of time.
using PropagatorFn = std::function<Operator(double)>;

// Y_a = [U (A' o P0)]_a / [U (A o P0)]_a with A' by centred differences.
// Throws "perturbation too strong" if some |[U (A o P0)]_a| drops below the guard.
EffectiveFields compute_fields(const RamanResult& A, const PropagatorFn& U, const Spinor& psi0);
EffectiveFields compute_fields(const RamanResult& A, const Evolution& ground, const Spinor& psi0);

// H_J = -sum_a gamma_a N_a + sum_{a<b} (nu_a - nu_b)/2 (<N_ab-> N_ab+ - <N_ab+> N_ab-)
Operator build_HJ(const Eigen::VectorXd& nu, const Eigen::VectorXd& gamma, const Spinor& psi);

// d<N_k>/dt for every basis element (n_basis order), given current expectations n:
// drive terms from nu, gamma plus -i<[N_k, Hm]> through the Hermitian expansion.
Eigen::VectorXd eom_rhs(const Eigen::VectorXd& nu, const Eigen::VectorXd& gamma, const Eigen::VectorXd& n,
                        const Operator& Hm, const std::vector<bool>& active = {});

// Same with the commutator part given as K (see commutator_matrix).
Eigen::VectorXd eom_rhs_K(const Eigen::VectorXd& nu, const Eigen::VectorXd& gamma, const Eigen::VectorXd& n,
                          const Eigen::MatrixXd& K, const std::vector<bool>& active = {});

// Matrix K with -i<[N_k, H]> = (K n)_k.
Eigen::MatrixXd commutator_matrix(const Operator& H);

// Expectations of a single spinor written as the vector expected by eom_rhs.
inline Eigen::VectorXd state_vector(const Spinor& psi) { return n_expectations(psi); }

// max over t >= t0 + field_tail*T of |nu|,|gamma| relative to their peak
double field_tail_ratio(const EffectiveFields& f, const PulseSpec& p);

}  // namespace ifesim
