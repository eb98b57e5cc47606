#pragma once

#include <array>
#include <cmath>
#include <string>

#include "sfwm/errors.hpp"
#include "sfwm/units.hpp"

namespace sfwm {

// Wavelength window (nm) over which the dispersion model is trusted.
inline constexpr double kWavelengthMinNm = 300.0;
inline constexpr double kWavelengthMaxNm = 2000.0;

enum class Axis { fast, slow };

// Three-term Sellmeier model, n^2 = 1 + sum_j B_j l^2 / (l^2 - l_j^2),
// with l in micrometers.
struct SellmeierModel {
  std::array<double, 3> strength{};      // B_j, dimensionless
  std::array<double, 3> resonance_um{};  // l_j, micrometers

  // Bulk fused silica (Malitson-type coefficients), the default medium.
  static SellmeierModel fused_silica() {
    return {{0.6961663, 0.4079426, 0.8974794},
            {0.0684043, 0.1162414, 9.896161}};
  }

  void validate() const {
    for (int j = 0; j < 3; ++j) {
      if (!(strength[j] > 0.0) || !(resonance_um[j] > 0.0))
        throw domain_error("SellmeierModel: coefficients must be strictly positive");
    }
    // n(lambda) must be real and > 1 across the sanity band.
    for (double lam = 400.0; lam <= 1700.0; lam += 25.0) {
      const double l2 = (lam / 1000.0) * (lam / 1000.0);
      double s = 1.0;
      for (int j = 0; j < 3; ++j)
        s += strength[j] * l2 / (l2 - resonance_um[j] * resonance_um[j]);
      if (!(s > 1.0) || !std::isfinite(s))
        throw domain_error("SellmeierModel: n(lambda) not real and > 1 on [400,1700] nm");
    }
  }
};

struct FiberSpec {
  double length_mm = 16.0;
  double birefringence = 3.5e-4;  // slow-axis minus fast-axis index
  SellmeierModel sellmeier = SellmeierModel::fused_silica();
  bool pumps_on_slow_axis = true;

  void validate() const {
    if (!(length_mm > 0.0)) throw domain_error("FiberSpec: length must be > 0");
    if (birefringence < 0.0) throw domain_error("FiberSpec: birefringence must be >= 0");
    sellmeier.validate();
  }

  Axis pump_axis() const { return pumps_on_slow_axis ? Axis::slow : Axis::fast; }
  Axis photon_axis() const { return pumps_on_slow_axis ? Axis::fast : Axis::slow; }
};

inline double refractive_index(const SellmeierModel& model, double lambda_nm) {
  if (!(lambda_nm >= kWavelengthMinNm && lambda_nm <= kWavelengthMaxNm))
    throw domain_error("refractive_index: wavelength " + std::to_string(lambda_nm) +
                       " nm outside validity window [300, 2000] nm");
  const double l2 = (lambda_nm / 1000.0) * (lambda_nm / 1000.0);
  double s = 1.0;
  for (int j = 0; j < 3; ++j)
    s += model.strength[j] * l2 / (l2 - model.resonance_um[j] * model.resonance_um[j]);
  return std::sqrt(s);
}

// k = n(w) w / c in rad/mm; the slow axis carries the extra dn w / c.
inline double wavenumber(const FiberSpec& fiber, double omega_rad_ps, Axis axis) {
  if (!(omega_rad_ps > 0.0)) throw domain_error("wavenumber: omega must be > 0");
  const double n = refractive_index(fiber.sellmeier, wavelength_nm_from_omega(omega_rad_ps));
  double k = n * omega_rad_ps / kSpeedOfLightMmPs;
  if (axis == Axis::slow) k += fiber.birefringence * omega_rad_ps / kSpeedOfLightMmPs;
  return k;
}

// dk/dw in ps/mm by central difference with relative step 1e-6. The
// birefringent term is linear in omega, so it is added analytically.
inline double inverse_group_velocity(const FiberSpec& fiber, double omega_rad_ps, Axis axis) {
  if (!(omega_rad_ps > 0.0)) throw domain_error("inverse_group_velocity: omega must be > 0");
  const double h = 1e-6 * omega_rad_ps;
  const double lam_lo = wavelength_nm_from_omega(omega_rad_ps + h);
  const double lam_hi = wavelength_nm_from_omega(omega_rad_ps - h);
  if (lam_lo < kWavelengthMinNm || lam_hi > kWavelengthMaxNm)
    throw domain_error("inverse_group_velocity: omega too close to window edge for stencil");
  const double kp = (wavenumber(fiber, omega_rad_ps + h, Axis::fast) -
                     wavenumber(fiber, omega_rad_ps - h, Axis::fast)) /
                    (2.0 * h);
  return axis == Axis::slow ? kp + fiber.birefringence / kSpeedOfLightMmPs : kp;
}

// Phase mismatch of the pair process at signal frequency omega_s, with the
// idler pinned by energy conservation. Pumps propagate on the pump axis,
// signal and idler on the orthogonal one.
inline double phase_mismatch(const FiberSpec& fiber, double omega_p1, double omega_p2,
                             double omega_s) {
  const double omega_i = omega_p1 + omega_p2 - omega_s;
  return wavenumber(fiber, omega_p1, fiber.pump_axis()) +
         wavenumber(fiber, omega_p2, fiber.pump_axis()) -
         wavenumber(fiber, omega_s, fiber.photon_axis()) -
         wavenumber(fiber, omega_i, fiber.photon_axis());
}

struct PhasematchedPair {
  double omega_s = 0.0;  // rad/ps, omega_s > omega_i by convention
  double omega_i = 0.0;
};

// Finds the root of the phase mismatch with omega_s above the mean pump
// frequency: bracketing scan at 0.5 nm resolution in lambda_s, then
// bisection to 1e-12 relative width.
inline PhasematchedPair solve_phasematching(const FiberSpec& fiber, double omega_p1,
                                            double omega_p2) {
  fiber.validate();
  for (double om : {omega_p1, omega_p2}) {
    const double lam = wavelength_nm_from_omega(om);
    if (!(lam >= kWavelengthMinNm && lam <= kWavelengthMaxNm))
      throw domain_error("solve_phasematching: pump outside validity window");
  }
  const double omega_sum = omega_p1 + omega_p2;
  const double omega_mid = 0.5 * omega_sum;

  // omega_s scans blueward from the mean pump; the idler must stay inside
  // the window, which caps the scan.
  const double omega_s_max =
      std::min(omega_from_wavelength_nm(kWavelengthMinNm), omega_sum - omega_from_wavelength_nm(kWavelengthMaxNm));

  // The scan anchor sits a quarter step beyond the mean pump frequency:
  // at omega_mid itself the mismatch of identical pumps is identically
  // zero (the trivial omega_s = omega_i point, not a pair solution).
  const double lam_start = wavelength_nm_from_omega(omega_mid) - 0.25;
  double prev_om = omega_from_wavelength_nm(lam_start);
  double prev_dk = phase_mismatch(fiber, omega_p1, omega_p2, prev_om);
  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  for (double lam = lam_start - 0.5; lam >= kWavelengthMinNm; lam -= 0.5) {
    const double om = omega_from_wavelength_nm(lam);
    if (om >= omega_s_max) break;
    const double dk = phase_mismatch(fiber, omega_p1, omega_p2, om);
    if ((prev_dk < 0.0) != (dk < 0.0)) {
      lo = prev_om;
      hi = om;
      bracketed = true;
      break;
    }
    prev_om = om;
    prev_dk = dk;
  }
  if (!bracketed)
    throw no_phasematch_error("solve_phasematching: no sign change of the phase mismatch "
                              "found in the scan window; no phasematched solution");

  double f_lo = phase_mismatch(fiber, omega_p1, omega_p2, lo);
  while ((hi - lo) > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = phase_mismatch(fiber, omega_p1, omega_p2, mid);
    if ((f_lo < 0.0) != (f_mid < 0.0)) {
      hi = mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
  }
  PhasematchedPair pair;
  pair.omega_s = 0.5 * (lo + hi);
  pair.omega_i = omega_sum - pair.omega_s;
  if (std::abs(phase_mismatch(fiber, omega_p1, omega_p2, pair.omega_s)) > 1e-9)
    throw numerical_error("solve_phasematching: residual mismatch above 1e-9 rad/mm");
  return pair;
}

}  // namespace sfwm
