#include "ifesim/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ifesim {

namespace {

double max_abs(const std::vector<double>& v, double offset = 0) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x - offset));
  return m;
}

AuditEntry below(const std::string& name, double measured, double limit) {
  return {name, measured, limit, measured <= limit};
}

}  // namespace

std::vector<AuditEntry> audit_series(const Series& s) {
  std::vector<AuditEntry> out;
  if (s.has("Sx") && s.has("Sy") && s.has("Sz")) {
    const auto &x = s.col("Sx"), &y = s.col("Sy"), &z = s.col("Sz");
    double worst = 0;
    std::vector<double> s2(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      s2[k] = x[k] * x[k] + y[k] * y[k] + z[k] * z[k];
      worst = std::max(worst, s2[k] - 0.25);
    }
    out.push_back(below("|S|^2 - 1/4 <= 1e-10", worst, 1e-10));
    if (s.has("envelope")) {
      const auto& env = s.col("envelope");
      const auto kpk = static_cast<std::size_t>(std::max_element(env.begin(), env.end()) - env.begin());
      const double peak = env.empty() ? 0 : env[kpk];
      double lo = 1e300, hi = -1e300;
      for (std::size_t k = kpk; k < env.size(); ++k) {
        if (env[k] > 1e-6 * peak) continue;
        lo = std::min(lo, s2[k]);
        hi = std::max(hi, s2[k]);
      }
      if (hi >= lo) out.push_back(below("post-pulse |S|^2 constant to 1e-8", hi - lo, 1e-8));
    }
  }
  for (const std::string p : {"", "diag_"}) {
    for (const std::string c : {"Mx", "My", "Lz"})
      if (s.has(p + c)) out.push_back(below(p + "|" + c + "| < 1e-8", max_abs(s.col(p + c)), 1e-8));
    if (s.has(p + "sum_m")) out.push_back(below(p + "|sum_m - 2| < 1e-10", max_abs(s.col(p + "sum_m"), 2), 1e-10));
  }
  if (s.has("diag_excluded"))
    out.push_back(below("excluded variables < 1e-10", max_abs(s.col("diag_excluded")), 1e-10));
  if (s.has("M1x") && s.has("M2x") && s.has("M1y") && s.has("M2y") && s.has("M1z") && s.has("M2z")) {
    double w = 0;
    const auto &ax = s.col("M1x"), &bx = s.col("M2x"), &ay = s.col("M1y"), &by = s.col("M2y"), &az = s.col("M1z"),
               &bz = s.col("M2z");
    for (std::size_t k = 0; k < ax.size(); ++k)
      w = std::max({w, std::abs(ax[k] + bx[k]), std::abs(ay[k] + by[k]), std::abs(az[k] - bz[k])});
    out.push_back(below("sublattice antisymmetry M1x=-M2x, M1y=-M2y, M1z=M2z", w, 1e-8));
  }
  return out;
}

bool all_pass(const std::vector<AuditEntry>& a) {
  return std::all_of(a.begin(), a.end(), [](const AuditEntry& e) { return e.pass; });
}

std::string format_audit(const std::vector<AuditEntry>& a, const std::string& indent) {
  std::string out;
  char buf[256];
  for (const auto& e : a) {
    std::snprintf(buf, sizeof buf, "%s%s %-52s measured %.3e (limit %.1e)\n", indent.c_str(), e.pass ? "PASS" : "FAIL",
                  e.invariant.c_str(), e.measured, e.limit);
    out += buf;
  }
  return out;
}

}  // namespace ifesim
