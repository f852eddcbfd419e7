#pragma once

#include <string>
#include <vector>

#include "ifesim/effective_field.hpp"
#include "ifesim/raman.hpp"
#include "ifesim/series.hpp"

namespace ifesim {

// Psi_g(t) = U(t) (A(t) o P0) / |A(t) o P0| on every grid node (n x count).
Eigen::MatrixXcd propagate_psi(const RamanResult& A, const PropagatorFn& U, const Spinor& psi0);

// Same state at arbitrary times: before the grid A = 1, after it A is held at its last value.
class SchrodingerOracle {
 public:
  SchrodingerOracle(const RamanResult& A, PropagatorFn U, Spinor psi0);
  Spinor at(double t) const;

 private:
  const RamanResult& A_;
  PropagatorFn U_;
  Spinor psi0_;
};

struct ComponentDeviation {
  std::string name;
  double max_abs = 0;
  double t_at_max = 0;
};

struct OracleReport {
  std::vector<ComponentDeviation> components;
  double max_abs = 0;
  double tolerance = 0;
  bool pass() const { return max_abs <= tolerance; }
};

// Componentwise max-norm deviation on identical time grids (throws otherwise).
// Compares the named columns, or every column common to both when names is empty.
OracleReport oracle_compare(const Series& heis, const Series& schr, double tolerance,
                            const std::vector<std::string>& names = {});

}  // namespace ifesim
