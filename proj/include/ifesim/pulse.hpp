#pragma once

#include <cstddef>

namespace ifesim {

// Left-circular Gaussian pulse propagating along +z. All fields in atomic units.
struct PulseSpec {
  double E = 0;       // amplitude multiplying the envelope
  double T = 1;       // envelope width
  double omega0 = 1;  // carrier frequency
  double t0 = 0;      // envelope centre
};

void validate(const PulseSpec& p);

// exp(-(t-t0)^2/T^2)/sqrt(pi^3)
double envelope(const PulseSpec& p, double t);
// envelope(t) cos(omega0 (t - t0)); the coupling scalar used by both Raman engines
double carrier_field(const PulseSpec& p, double t);

// Cycle-averaged intensity (c/8pi) E^2 p(t)^2 in W/cm^2.
double intensity_Wcm2(const PulseSpec& p, double t);
// Time integral of the cycle-averaged intensity, in mJ/cm^2.
double fluence_mJcm2(const PulseSpec& p);
// FWHM of the intensity profile, T sqrt(2 ln 2).
double intensity_fwhm(const PulseSpec& p);

// E = sqrt(I / I_au)
double amplitude_from_intensity(double I_Wcm2);
// Inverts fluence_mJcm2 for E with the envelope normalisation included.
double amplitude_from_fluence(double fluence_mJcm2, double T_fs, double omega0_eV);

// Uniform sampling grid t_k = t_start + k dt.
struct TimeGrid {
  double t_start = 0;
  double dt = 1;
  std::size_t count = 0;

  double t(std::size_t k) const { return t_start + static_cast<double>(k) * dt; }
  double t_end() const { return t(count - 1); }
  // grid covering t0 +- span*T, rounded so that count is odd
  static TimeGrid around(const PulseSpec& p, double span, double dt);
};

}  // namespace ifesim
