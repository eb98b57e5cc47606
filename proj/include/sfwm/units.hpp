#pragma once

#include <cmath>

// Internal unit system: time in ps, length in mm, wavelength I/O in nm,
// angular frequency in rad/ps. Keeps magnitudes near unity for cm-scale
// fibers and ps-scale pulses.

namespace sfwm {

inline constexpr double kSpeedOfLightMmPs = 0.299792458;  // c, mm/ps
inline constexpr double kSpeedOfLightNmPs = 299792.458;   // c, nm/ps
inline constexpr double kPi = 3.14159265358979323846;

inline double omega_from_wavelength_nm(double lambda_nm) {
  return 2.0 * kPi * kSpeedOfLightNmPs / lambda_nm;  // rad/ps
}

inline double wavelength_nm_from_omega(double omega_rad_ps) {
  return 2.0 * kPi * kSpeedOfLightNmPs / omega_rad_ps;
}

// Pump amplitude convention: exp(-nu^2/sigma^2), so the intensity FWHM is
// sigma*sqrt(2 ln 2). Spectrometer-style inputs are intensity FWHM in nm.
inline double sigma_from_fwhm_nm(double fwhm_nm, double lambda_nm) {
  const double dw = 2.0 * kPi * kSpeedOfLightNmPs * fwhm_nm / (lambda_nm * lambda_nm);
  return dw / std::sqrt(2.0 * std::log(2.0));
}

inline double fwhm_nm_from_sigma(double sigma_rad_ps, double lambda_nm) {
  const double dw = sigma_rad_ps * std::sqrt(2.0 * std::log(2.0));
  return dw * lambda_nm * lambda_nm / (2.0 * kPi * kSpeedOfLightNmPs);
}

}  // namespace sfwm
