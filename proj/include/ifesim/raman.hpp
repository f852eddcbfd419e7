#pragma once

#include <vector>

#include "ifesim/pulse.hpp"
#include "ifesim/qm.hpp"

namespace ifesim {

// Virtual intermediate sublevel for the single-spin Raman process.
struct IntermediateLevel {
  double energy = 0;       // measured from the unsplit ground level, Hartree
  double weight_up = 0;    // |d_up,j|^2
  double weight_down = 0;  // |d_down,j|^2
};

// Ground-manifold Raman factors A_a(t) on a grid; column k holds time t_k.
struct RamanResult {
  TimeGrid grid;
  Eigen::MatrixXcd A;
  bool converged_tail = false;
  double tail_change = 0;  // max relative change of A after the plateau time
  double leakage = 0;      // max |C_a| on components where the initial state vanishes
};

// Plateau is judged from t0 + tail_start*T onward.
inline constexpr double tail_start = 4.5;
inline constexpr double tail_tol = 1e-8;

// Throws when dt does not resolve the carrier (dt > (2pi/omega0)/40) or the grid misses t0 +- 3T.
void check_grid(const PulseSpec& p, const TimeGrid& g);

// Cumulative trapezoid of samples f (column-wise for matrices).
Eigen::MatrixXcd cumulative_trapezoid(const Eigen::MatrixXcd& f, double dt);

// Spin-1/2 Raman factor: A = 1 + (E/w0)^2 int dt' exp(-iB Sx t') (sum_j |d_j|^2 G_j(t')),
// G_j(t') = exp(-i w_j t') F(t') int^t' dt'' exp(i w_j t'') exp(-iBt''/2) F(t'').
RamanResult single_spin_A(const PulseSpec& p, const std::vector<IntermediateLevel>& levels, double B,
                          const TimeGrid& g);

// 6x4 dipole matrix from the J=3/2 ground term to the J=5/2 excited term, left-circular light.
Eigen::MatrixXd dipole_D();

// Second-order spinor C(t) for one sublattice (4 x count):
// E^2 |d0|^2 int dt' F U1^-1(t') D^T Ue(t') int^t' dt'' F Ue^-1(t'') D U1(t'') psi0.
Eigen::MatrixXcd antiferro_C(const PulseSpec& p, const Evolution& ground, const Evolution& excited,
                             const Spinor& psi0, double d0, const TimeGrid& g);

// A_a = 1 - C_a / P0_a where P0_a != 0, otherwise 0.
RamanResult antiferro_A(const Eigen::MatrixXcd& C, const Spinor& psi0, const PulseSpec& p,
                        const TimeGrid& g);

// Plateau diagnostics shared by both engines.
void finish_tail(RamanResult& r, const PulseSpec& p);

}  // namespace ifesim
