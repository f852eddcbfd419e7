#pragma once

// Atomic units (hbar = e = m_e = 1) and laboratory conversions.
namespace ifesim::units {

inline constexpr double pi = 3.14159265358979323846;

inline constexpr double hartree_eV = 27.211386245988;
inline constexpr double time_fs = 0.024188843265857;     // one a.u. of time in fs
inline constexpr double field_Vm = 5.14220674763e11;     // one a.u. of electric field in V/m
inline constexpr double intensity_Wcm2 = 3.50944758e16;  // (c/8pi) E^2 at E = 1 a.u.
inline constexpr double bfield_T = 2.35051756758e5;      // one a.u. of magnetic field in T

constexpr double eV_to_au(double x) { return x / hartree_eV; }
constexpr double au_to_eV(double x) { return x * hartree_eV; }
constexpr double meV_to_au(double x) { return x * 1e-3 / hartree_eV; }
constexpr double au_to_meV(double x) { return x * hartree_eV * 1e3; }
constexpr double fs_to_au(double x) { return x / time_fs; }
constexpr double au_to_fs(double x) { return x * time_fs; }
constexpr double tesla_to_au(double x) { return x / bfield_T; }
constexpr double au_to_tesla(double x) { return x * bfield_T; }
constexpr double Wcm2_to_au(double x) { return x / intensity_Wcm2; }
constexpr double au_to_Wcm2(double x) { return x * intensity_Wcm2; }
constexpr double Vm_to_au(double x) { return x / field_Vm; }
constexpr double au_to_Vm(double x) { return x * field_Vm; }

}  // namespace ifesim::units
