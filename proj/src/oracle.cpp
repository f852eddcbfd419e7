#include "ifesim/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace ifesim {

namespace {

Spinor normalized(const Spinor& x) {
  const double nrm = x.norm();
  if (!(nrm > 1e-8)) throw std::runtime_error("oracle: vanishing norm of the perturbed spinor");
  return x / nrm;
}

}  // namespace

Eigen::MatrixXcd propagate_psi(const RamanResult& A, const PropagatorFn& U, const Spinor& psi0) {
  if (A.A.rows() != psi0.size()) throw std::invalid_argument("propagate_psi: dimension mismatch");
  Eigen::MatrixXcd out(A.A.rows(), A.A.cols());
  for (Eigen::Index k = 0; k < A.A.cols(); ++k) {
    const Spinor x = A.A.col(k).cwiseProduct(psi0);
    out.col(k) = U(A.grid.t(static_cast<std::size_t>(k))) * normalized(x);
  }
  return out;
}

SchrodingerOracle::SchrodingerOracle(const RamanResult& A, PropagatorFn U, Spinor psi0)
    : A_(A), U_(std::move(U)), psi0_(std::move(psi0)) {
  if (A_.A.rows() != psi0_.size()) throw std::invalid_argument("SchrodingerOracle: dimension mismatch");
}

Spinor SchrodingerOracle::at(double t) const {
  const TimeGrid& g = A_.grid;
  Spinor x;
  if (t < g.t_start) {
    x = psi0_;
  } else if (t >= g.t_end()) {
    x = A_.A.col(A_.A.cols() - 1).cwiseProduct(psi0_);
  } else {
    const double pos = (t - g.t_start) / g.dt;
    const auto k = static_cast<Eigen::Index>(std::llround(pos));
    if (std::abs(pos - static_cast<double>(k)) > 1e-6)
      throw std::invalid_argument("SchrodingerOracle: time is not a grid node");
    x = A_.A.col(k).cwiseProduct(psi0_);
  }
  return U_(t) * normalized(x);
}

OracleReport oracle_compare(const Series& heis, const Series& schr, double tolerance,
                            const std::vector<std::string>& names) {
  if (heis.t.size() != schr.t.size()) throw std::invalid_argument("oracle_compare: grid mismatch (length)");
  for (std::size_t k = 0; k < heis.t.size(); ++k)
    if (std::abs(heis.t[k] - schr.t[k]) > 1e-9 * std::max(1.0, std::abs(heis.t[k])))
      throw std::invalid_argument("oracle_compare: grid mismatch at sample " + std::to_string(k));
  std::vector<std::string> cols = names;
  if (cols.empty())
    for (const auto& n : heis.names)
      if (schr.has(n)) cols.push_back(n);

  OracleReport r;
  r.tolerance = tolerance;
  for (const auto& n : cols) {
    const auto& a = heis.col(n);
    const auto& b = schr.col(n);
    ComponentDeviation d{n, 0, heis.t.empty() ? 0 : heis.t[0]};
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double e = std::abs(a[k] - b[k]);
      if (e > d.max_abs) {
        d.max_abs = e;
        d.t_at_max = heis.t[k];
      }
    }
    r.max_abs = std::max(r.max_abs, d.max_abs);
    r.components.push_back(d);
  }
  return r;
}

}  // namespace ifesim
