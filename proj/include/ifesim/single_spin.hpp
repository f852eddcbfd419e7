#pragma once

#include <array>
#include <vector>

#include "ifesim/effective_field.hpp"
#include "ifesim/raman.hpp"
#include "ifesim/series.hpp"

namespace ifesim {

// Spin-1/2 ground state with a field B along x and a spin-orbit split 2p manifold.
// All values in atomic units.
struct SingleSpinSpec {
  double B = 0;
  double lambda = 0.02 / 27.211386245988;
  double mu = -0.5;
  double eps_1s = -0.5;
  double eps_2p = -0.125;
  PulseSpec pulse;
};

void validate(const SingleSpinSpec& s);

// One eigenstate of -lambda L.S + mu B (2Sx + Lx) in the 2p manifold.
struct Level2p {
  double E = 0;       // shift from eps_2p
  int branch = 1;     // +1 or -1, sign of the cubic it solves
  double alpha = 0;   // amplitude on |Lz=1, up>
  double beta = 0;    // amplitude on |Lz=1, down>
  double gamma = 0;   // amplitude on |Lz=0, up>
  double weight_up() const { return alpha * alpha; }
  double weight_down() const { return beta * beta; }
};

// E^3 + s mu B E^2 - (3 lambda^2/4 + (mu B)^2) E - s (mu B)^3 ... evaluated for branch s.
double level_cubic(double E, double B, double lambda, double mu, int branch);

// Six levels, three per branch, each branch ordered by ascending energy.
// Throws if an eigenvalue fails its branch cubic.
std::vector<Level2p> solve_2p_levels(double B, double lambda, double mu = -0.5);

std::vector<IntermediateLevel> intermediate_levels(const SingleSpinSpec& s);

// Pure state with <S> = S (|S| = 1/2), first component real and >= 0.
Spinor spinor_from_spin(const std::array<double, 3>& S);

// exp(-i Hm t) with Hm = -B Sx.
Operator spin_propagator(double B, double t);

struct SpinFields {
  std::vector<double> f, g, h;
};
SpinFields spin_fgh(const EffectiveFields& fields);

// d(Sx,Sy,Sz)/dt for the given instantaneous f, g and B.
std::array<double, 3> spin_rhs(const std::array<double, 3>& S, double f, double g, double B);

struct SpinRunOptions {
  double dt = 0.1;            // Raman grid step; RK4 steps are 2 dt
  double span = 6.0;          // grid half-width in units of T
  double t_end = 0;           // integrate freely up to here when beyond the grid
  double post_step = 4.0;     // RK4 step after the grid
  double step_guard = 1e-7;   // max endpoint change allowed under step halving
  bool check_step = true;
};

// Heisenberg result on the RK4 nodes: columns Sx, Sy, Sz, f, g, h, envelope.
struct SpinTrajectory {
  Series series;
  double step_change = 0;  // endpoint change between step 4dt and 2dt
};

// Integrates the spin equations with fields sampled on grid nodes. f, g may be empty (no pulse).
SpinTrajectory integrate_spin(const SingleSpinSpec& s, const TimeGrid& grid, const SpinFields& fields,
                              const std::array<double, 3>& S0, const SpinRunOptions& opt);

// Full pipeline for one spec.
struct SpinRun {
  RamanResult raman;
  EffectiveFields fields;
  SpinFields fgh;
  SpinTrajectory traj;
};
SpinRun run_single_spin(const SingleSpinSpec& s, const SpinRunOptions& opt,
                        const std::array<double, 3>& S0 = {0.5, 0, 0});

// Schroedinger-picture Sx, Sy, Sz on the trajectory's sample times.
Series spin_oracle(const SingleSpinSpec& s, const SpinRun& run, const std::array<double, 3>& S0 = {0.5, 0, 0});

// Phase offset in degrees between the full run and the sudden baseline, mean over one
// Larmor period starting at t_window (a.u., relative to t0).
struct SuddenResult {
  double offset_deg = 0;
  double tau_p = 0;
  double larmor_period = 0;
};
SuddenResult sudden_comparison(const SingleSpinSpec& s, const SpinRunOptions& opt, double tau_p_fs = 200,
                               double window_fs = 1000);

// Mean period of zero crossings of a signal (after removing its mean), for t >= t_from.
double crossing_period(const std::vector<double>& t, const std::vector<double>& x, double t_from);

// Larmor period measured from a free run with S0 = (0, 1/2, 0).
double measure_larmor_period(double B, double periods = 3, double step = 4.0);

}  // namespace ifesim
