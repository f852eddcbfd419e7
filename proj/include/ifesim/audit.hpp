#pragma once

#include <string>
#include <vector>

#include "ifesim/series.hpp"

namespace ifesim {

struct AuditEntry {
  std::string invariant;
  double measured = 0;
  double limit = 0;
  bool pass = false;
};

// Applies every invariant whose columns are present:
//   Sx,Sy,Sz: |S|^2 <= 1/4 + 1e-10, and |S|^2 constant to 1e-8 once the envelope column has decayed
//   Mx, My, Lz (and diag_ variants): |.| < 1e-8
//   sum_m (and diag_sum_m): |sum - 2| < 1e-10
//   diag_excluded: < 1e-10
//   M1x/M2x, M1y/M2y, M1z/M2z: sublattice antisymmetry to 1e-8
std::vector<AuditEntry> audit_series(const Series& s);

bool all_pass(const std::vector<AuditEntry>& a);
std::string format_audit(const std::vector<AuditEntry>& a, const std::string& indent = "  ");

}  // namespace ifesim
