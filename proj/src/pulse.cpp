#include "ifesim/pulse.hpp"

#include <cmath>
#include <stdexcept>

#include "ifesim/units.hpp"

namespace ifesim {

namespace {
const double inv_sqrt_pi3 = 1.0 / std::sqrt(units::pi * units::pi * units::pi);
}

void validate(const PulseSpec& p) {
  if (!(p.E >= 0)) throw std::invalid_argument("pulse amplitude must be >= 0");
  if (!(p.T > 0)) throw std::invalid_argument("pulse width must be > 0");
  if (!(p.omega0 > 0)) throw std::invalid_argument("carrier frequency must be > 0");
}

double envelope(const PulseSpec& p, double t) {
  const double x = (t - p.t0) / p.T;
  return std::exp(-x * x) * inv_sqrt_pi3;
}

double carrier_field(const PulseSpec& p, double t) {
  return envelope(p, t) * std::cos(p.omega0 * (t - p.t0));
}

double intensity_Wcm2(const PulseSpec& p, double t) {
  const double a = p.E * envelope(p, t);
  return units::au_to_Wcm2(a * a);
}

double fluence_mJcm2(const PulseSpec& p) {
  // int exp(-2x^2/T^2) dx = T sqrt(pi/2)
  const double integral_au = p.E * p.E * p.T * std::sqrt(units::pi / 2) / (units::pi * units::pi * units::pi);
  return units::au_to_Wcm2(integral_au) * units::au_to_fs(1.0) * 1e-15 * 1e3;
}

double intensity_fwhm(const PulseSpec& p) { return p.T * std::sqrt(2.0 * std::log(2.0)); }

double amplitude_from_intensity(double I_Wcm2) {
  if (!(I_Wcm2 > 0)) throw std::invalid_argument("intensity must be > 0");
  return std::sqrt(units::Wcm2_to_au(I_Wcm2));
}

double amplitude_from_fluence(double fluence, double T_fs, double omega0_eV) {
  if (!(fluence > 0) || !(T_fs > 0) || !(omega0_eV > 0))
    throw std::invalid_argument("fluence, duration and carrier must be > 0");
  PulseSpec unit{1.0, units::fs_to_au(T_fs), units::eV_to_au(omega0_eV), 0.0};
  return std::sqrt(fluence / fluence_mJcm2(unit));
}

TimeGrid TimeGrid::around(const PulseSpec& p, double span, double dt) {
  if (!(dt > 0) || !(span > 0)) throw std::invalid_argument("grid step and span must be > 0");
  const auto half = static_cast<std::size_t>(std::ceil(span * p.T / dt));
  return TimeGrid{p.t0 - static_cast<double>(half) * dt, dt, 2 * half + 1};
}

}  // namespace ifesim
