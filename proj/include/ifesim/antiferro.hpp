#pragma once

#include <array>
#include <string>
#include <vector>

#include "ifesim/effective_field.hpp"
#include "ifesim/raman.hpp"
#include "ifesim/series.hpp"

namespace ifesim {

enum class CrystalAxis { z, x };

// Two J=3/2 sublattices, mean-field exchange and a uniaxial crystal field. Atomic units.
struct AntiferroSpec {
  double Jex = 0;
  CrystalAxis axis = CrystalAxis::z;
  double Delta = 0;    // > 0 for axis z, < 0 for axis x
  double Delta_e = 0;  // excited-term crystal field
  double eps_ex = 0;   // excited-term energy above the ground term
  double d0 = 1;
  PulseSpec pulse;
};

void validate(const AntiferroSpec& s);

// Delta (3 J_axis^2 - J(J+1)) on the spin-J space.
Operator crystal_field(CrystalAxis axis, double Delta, double J);

struct GroundState {
  double c = 0, d = 0;
  double Jx1 = 0;  // <Jx> on sublattice 1
  double J0 = 0;   // Jex * Jx1
  Spinor psi1, psi2;
  int iterations = 0;
};

// Self-consistent lowest state of crystal - Jex <Jx1> Jx on sublattice 1; sublattice 2 is
// diag(1,-1,1,-1) psi1. Axis x is analytic.
GroundState ground_state(const AntiferroSpec& s);

// Frozen mean-field Hamiltonian of sublattice 1 or 2 after the ground state is fixed.
Operator sublattice_hamiltonian(const AntiferroSpec& s, const GroundState& g, int sublattice);

struct ExcitedScheme {
  Operator H;                   // 6x6, eps_ex + Delta_e (3 J_axis^2 - 35/4)
  std::vector<double> levels;   // distinct energies, ascending
};
ExcitedScheme excited_scheme(const AntiferroSpec& s);

// ---- m/l variables ----
// m_ab = p_a p_b (<N_ab>_1 + <N_ab>_2), l_ab = p_a p_b (<N_ab>_1 - <N_ab>_2), p = (sqrt3/2, 1, 1, sqrt3/2).
inline constexpr int ml_count = 16;
enum MLVar {
  l12p, l12m, l23p, l23m, l34p, l34m, l14p, l14m,
  m13p, m13m, m24p, m24m, m1, m2, m3, m4
};
const std::array<std::string, ml_count>& ml_names();
// (a, b, sign) of each variable (0-based; a == b for m1..m4)
NIndex ml_index(int var);
bool ml_is_l(int var);
double ml_weight(int a);

using MLState = std::array<double, ml_count>;

// Full set in n_basis order: m[k] and l[k] for every basis element of both sublattices.
struct FullML {
  Eigen::VectorXd m, l;
};
FullML full_ml(const Spinor& psi1, const Spinor& psi2);
FullML full_ml(const Eigen::VectorXd& n1, const Eigen::VectorXd& n2);
void sublattice_expectations(const FullML& f, Eigen::VectorXd& n1, Eigen::VectorXd& n2);
MLState ml_from_full(const FullML& f);
// Variables the reduced model drops: m12, m23, m34, m14, l13, l24 (both signs) and l1..l4.
std::vector<std::pair<bool, int>> excluded_variables();  // (is_l, n_basis position)
double max_excluded(const FullML& f);

// ---- commutator table ----
enum MLColumn { colLx, colLy, colMz, colZ2, colX2 };
inline constexpr int ml_columns = 5;
struct MLTerm {
  double coef;
  int var;
};
// -i<[x, O]> = sum of terms, for the operator columns Lx, Ly, Mz, (Mz^2+Lz^2)/2, (Mx^2+Lx^2)/2.
const std::vector<MLTerm>& commutator_cell(int var, int column);
double eval_cell(int var, int column, const MLState& x);

// Macroscopic vectors from the state (M, L with Lz = Mx = My = 0 structurally).
struct MLVectors {
  double Lx, Ly, Lz, Mx, My, Mz;
};
MLVectors ml_vectors(const MLState& x);
// Same, from the full set (all six components evaluated).
MLVectors ml_vectors(const FullML& f);

enum class ExchangeMode { live, frozen };

// Time derivative of the 16 variables (m4 row included for the diagnostic sum).
MLState antiferro_eom_rhs(const MLState& x, const Eigen::VectorXd& nu, const Eigen::VectorXd& gamma,
                          const AntiferroSpec& s, ExchangeMode mode = ExchangeMode::live,
                          const MLVectors& frozen = {});

// F0 Mz + Fz reproduces the drive part of Mz'; Fz is evaluated from that identity.
struct MLDrivers {
  double F0 = 0, g = 0, Fx = 0, Fy = 0, Gx = 0, Gy = 0, Fz = 0;
};
MLDrivers ml_drivers(const MLState& x, const Eigen::VectorXd& nu, const Eigen::VectorXd& gamma);

// Mean-field energy Jex J1.J2 + <crystal>_1 + <crystal>_2.
double mean_field_energy(const AntiferroSpec& s, const MLState& x);

struct AntiferroOptions {
  double dt = 0.1;
  double span = 6.0;
  double t_end = 0;          // free evolution up to here after the grid
  double post_step = 4.0;
  double invariant_abort = 1e-6;
  ExchangeMode mode = ExchangeMode::live;
  bool full_diagnostic = false;  // also integrate the 32-variable system
  bool oracle = false;
};

struct AntiferroRun {
  GroundState ground;
  RamanResult raman;
  EffectiveFields fields;
  Series series;                 // t, Lx, Ly, Lz, Mx, My, Mz, M1x..M2z, sum_m, envelope
  Series vars;                   // the 16 m/l variables on the same times
  Series full;                   // 32-variable diagnostic: max_excluded, deviation, Mx, My, Lz, sum_m
  Series oracle;                 // frozen mean-field Schroedinger oracle: the 16 variables, Lx, Ly, Mz
  double post_energy_drift = 0;  // relative change of the mean-field energy after the field tail
};

AntiferroRun run_antiferro(const AntiferroSpec& s, const AntiferroOptions& opt);

// Variables from the ground state, for seeding integrations.
MLState initial_state(const GroundState& g);

// RK4 of the 15 variables with zero fields from x0 over [0, t_end]; samples every step.
std::vector<MLState> integrate_free(const AntiferroSpec& s, const MLState& x0, double t_end, double step,
                                    std::vector<double>* times = nullptr);

}  // namespace ifesim
