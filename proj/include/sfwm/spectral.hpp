#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "sfwm/complex_erf.hpp"
#include "sfwm/dispersion.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/units.hpp"

namespace sfwm {

struct PumpPulse {
  double wavelength_nm = 0.0;
  double sigma = 0.0;           // amplitude 1/e half width, rad/ps
  double average_power_mw = 0;  // informational only

  static PumpPulse from_fwhm_nm(double lambda_nm, double fwhm_nm, double power_mw = 0.0) {
    return {lambda_nm, sigma_from_fwhm_nm(fwhm_nm, lambda_nm), power_mw};
  }

  void validate() const {
    if (!(sigma > 0.0)) throw domain_error("PumpPulse: sigma must be > 0");
    if (!(wavelength_nm >= kWavelengthMinNm && wavelength_nm <= kWavelengthMaxNm))
      throw domain_error("PumpPulse: wavelength outside validity window");
  }
};

// Derived quantities of one dual-pump configuration. tau_s/tau_i/tau_p are
// fiber-length times inverse-group-velocity differences; Ts/Ti additionally
// carry the bandwidth-imbalance shift.
struct ProcessParams {
  double omega_s = 0.0, omega_i = 0.0;  // rad/ps
  double tau_s = 0.0, tau_i = 0.0;      // ps, photon vs mean-pump group delay
  double tau_p = 0.0;                   // ps, pump-pump walkoff over the fiber
  double Ts = 0.0, Ti = 0.0;            // ps, bandwidth-weighted delays
  double sigma1 = 0.0, sigma2 = 0.0;    // rad/ps
  double sigma = 0.0;                   // rad/ps, sigma1 sigma2 / sqrt(sigma1^2+sigma2^2)
  double length_mm = 0.0;

  void validate() const {
    if (!(sigma1 > 0.0 && sigma2 > 0.0)) throw domain_error("ProcessParams: bandwidths must be > 0");
    const double s = sigma1 * sigma2 / std::hypot(sigma1, sigma2);
    if (std::abs(s - sigma) > 1e-12 * s)
      throw domain_error("ProcessParams: sigma inconsistent with sigma1, sigma2");
    const double w = (sigma1 * sigma1 - sigma2 * sigma2) / (sigma1 * sigma1 + sigma2 * sigma2);
    const double scale = std::abs(Ts) + std::abs(Ti) + std::abs(tau_p) + 1e-300;
    if (std::abs(Ts - (tau_s + w * tau_p / 2.0)) > 1e-12 * scale ||
        std::abs(Ti - (tau_i + w * tau_p / 2.0)) > 1e-12 * scale)
      throw domain_error("ProcessParams: Ts/Ti inconsistent with tau_s/tau_i/tau_p");
  }
};

inline ProcessParams process_params(const FiberSpec& fiber, const PumpPulse& pump1,
                                    const PumpPulse& pump2) {
  fiber.validate();
  pump1.validate();
  pump2.validate();
  const double om1 = omega_from_wavelength_nm(pump1.wavelength_nm);
  const double om2 = omega_from_wavelength_nm(pump2.wavelength_nm);
  const PhasematchedPair pm = solve_phasematching(fiber, om1, om2);

  const Axis pa = fiber.pump_axis(), ga = fiber.photon_axis();
  const double kp1 = inverse_group_velocity(fiber, om1, pa);
  const double kp2 = inverse_group_velocity(fiber, om2, pa);
  const double kps = inverse_group_velocity(fiber, pm.omega_s, ga);
  const double kpi = inverse_group_velocity(fiber, pm.omega_i, ga);

  ProcessParams p;
  p.omega_s = pm.omega_s;
  p.omega_i = pm.omega_i;
  p.length_mm = fiber.length_mm;
  p.tau_s = fiber.length_mm * (0.5 * (kp1 + kp2) - kps);
  p.tau_i = fiber.length_mm * (0.5 * (kp1 + kp2) - kpi);
  p.tau_p = fiber.length_mm * (kp1 - kp2);
  p.sigma1 = pump1.sigma;
  p.sigma2 = pump2.sigma;
  p.sigma = p.sigma1 * p.sigma2 / std::hypot(p.sigma1, p.sigma2);
  const double w = (p.sigma1 * p.sigma1 - p.sigma2 * p.sigma2) /
                   (p.sigma1 * p.sigma1 + p.sigma2 * p.sigma2);
  p.Ts = p.tau_s + w * p.tau_p / 2.0;
  p.Ti = p.tau_i + w * p.tau_p / 2.0;
  return p;
}

struct GridSpec {
  int n_s = 256, n_i = 256;
  double s_min = 0, s_max = 0;  // rad/ps detuning axis bounds, signal
  double i_min = 0, i_max = 0;  // idler

  void validate() const {
    if (n_s < 8 || n_i < 8) throw domain_error("GridSpec: need at least 8 points per axis");
    if (!(s_max > s_min) || !(i_max > i_min)) throw domain_error("GridSpec: empty axis span");
  }
};

// Discretized complex JSA on a uniform rectangular detuning grid.
// amp(m, n) is the amplitude at (nu_s[m], nu_i[n]).
struct JsaGrid {
  std::vector<double> nu_s, nu_i;  // rad/ps, strictly increasing, uniform
  Eigen::MatrixXcd amp;
  bool normalized = false;

  double dnu_s() const { return (nu_s.back() - nu_s.front()) / double(nu_s.size() - 1); }
  double dnu_i() const { return (nu_i.back() - nu_i.front()) / double(nu_i.size() - 1); }

  void validate_axes() const {
    if (nu_s.size() < 2 || nu_i.size() < 2) throw domain_error("JsaGrid: axes too short");
    for (const auto* ax : {&nu_s, &nu_i}) {
      const double d = ((*ax).back() - (*ax).front()) / double(ax->size() - 1);
      if (!(d > 0.0)) throw domain_error("JsaGrid: axis not increasing");
      for (std::size_t k = 1; k < ax->size(); ++k) {
        const double step = (*ax)[k] - (*ax)[k - 1];
        if (std::abs(step - d) > 1e-9 * d) throw domain_error("JsaGrid: axis not uniform");
      }
    }
    if (amp.rows() != Eigen::Index(nu_s.size()) || amp.cols() != Eigen::Index(nu_i.size()))
      throw domain_error("JsaGrid: amplitude shape does not match axes");
  }
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * double(k) / double(n - 1);
  return v;
}

template <class PointFn>
JsaGrid fill_grid(const GridSpec& spec, PointFn&& f) {
  spec.validate();
  JsaGrid g;
  g.nu_s = linspace(spec.s_min, spec.s_max, spec.n_s);
  g.nu_i = linspace(spec.i_min, spec.i_max, spec.n_i);
  g.amp.resize(spec.n_s, spec.n_i);
  // serial row-major fill; results are reproducible bit for bit
  for (int m = 0; m < spec.n_s; ++m)
    for (int n = 0; n < spec.n_i; ++n) g.amp(m, n) = f(g.nu_s[m], g.nu_i[n]);
  g.normalized = false;
  return g;
}

inline std::complex<double> dual_point(const ProcessParams& p, double tau, double ns, double ni) {
  const double u = ns + ni;
  const double x = (p.Ts * ns + p.Ti * ni) / (p.sigma * p.tau_p);
  const double g1 = std::exp(-u * u / (p.sigma1 * p.sigma1 + p.sigma2 * p.sigma2));
  return g1 * erf_window(x, p.sigma * (tau + p.tau_p) / 2.0, p.sigma * tau / 2.0);
}

inline double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace detail

inline void require_dual(const ProcessParams& p, const char* who) {
  if (p.tau_p == 0.0)
    throw degenerate_config_error(std::string(who) +
                                  ": tau_p = 0 (degenerate pumps); use jsa_degenerate");
}

// Eq.-level dual-pump JSA at pump delay tau (unnormalized).
inline JsaGrid jsa_dual(const ProcessParams& p, double tau, const GridSpec& spec) {
  p.validate();
  require_dual(p, "jsa_dual");
  if (!std::isfinite(tau)) throw domain_error("jsa_dual: tau must be finite");
  return detail::fill_grid(spec, [&](double ns, double ni) { return detail::dual_point(p, tau, ns, ni); });
}

// The maximal-overlap configuration tau = -tau_p/2.
inline JsaGrid jsa_overlap_max(const ProcessParams& p, const GridSpec& spec) {
  p.validate();
  require_dual(p, "jsa_overlap_max");
  return jsa_dual(p, -p.tau_p / 2.0, spec);
}

// Single-pump (degenerate) JSA: Gaussian energy factor times the sinc
// window from the abrupt start and end of the interaction.
inline JsaGrid jsa_degenerate(double sigma1, double sigma2, double tau_s, double tau_i,
                              const GridSpec& spec) {
  if (!(sigma1 > 0.0 && sigma2 > 0.0)) throw domain_error("jsa_degenerate: bandwidths must be > 0");
  const double ss = sigma1 * sigma1 + sigma2 * sigma2;
  return detail::fill_grid(spec, [&](double ns, double ni) {
    const double u = ns + ni;
    return std::complex<double>(std::exp(-u * u / ss) * detail::sinc(tau_s * ns + tau_i * ni), 0.0);
  });
}

// Large-walkoff limit: the erf window flattens and only the two Gaussian
// factors survive. Real and positive everywhere.
inline JsaGrid jsa_asymptotic(const ProcessParams& p, const GridSpec& spec) {
  p.validate();
  require_dual(p, "jsa_asymptotic");
  const double ss = p.sigma1 * p.sigma1 + p.sigma2 * p.sigma2;
  const double st = p.sigma * p.tau_p;
  return detail::fill_grid(spec, [&](double ns, double ni) {
    const double u = ns + ni;
    const double x = (p.Ts * ns + p.Ti * ni) / st;
    return std::complex<double>(std::exp(-u * u / ss) * std::exp(-x * x), 0.0);
  });
}

// p(tau)/p_max. The numerator is evaluated through erfc when both erf
// arguments share a sign, which keeps the far tails accurate.
inline double pair_probability_ratio(double tau, double sigma, double tau_p) {
  if (!(sigma > 0.0)) throw domain_error("pair_probability_ratio: sigma must be > 0");
  if (tau_p == 0.0)
    throw degenerate_config_error("pair_probability_ratio: tau_p = 0 (degenerate pumps)");
  const double a = sigma * (tau + tau_p) / std::sqrt(2.0);
  const double b = sigma * tau / std::sqrt(2.0);
  double num;
  if (a >= 0.0 && b >= 0.0)
    num = std::erfc(b) - std::erfc(a);
  else if (a <= 0.0 && b <= 0.0)
    num = std::erfc(-a) - std::erfc(-b);
  else
    num = std::erf(a) - std::erf(b);
  const double den = 2.0 * std::erf(sigma * tau_p / (2.0 * std::sqrt(2.0)));
  double ratio = num / den;
  if (ratio < 0.0) ratio = 0.0;  // rounding of the erf differences
  if (ratio > 1.0) ratio = 1.0;
  return ratio;
}

// (sigma1^2 + sigma2^2) Ts Ti + (sigma tau_p)^2; smaller means a more
// factorable asymptotic JSA.
inline double factorability_metric(const ProcessParams& p) {
  p.validate();
  const double st = p.sigma * p.tau_p;
  return (p.sigma1 * p.sigma1 + p.sigma2 * p.sigma2) * p.Ts * p.Ti + st * st;
}

enum class JsaKind { dual, overlap_max, degenerate, asymptotic };

namespace detail {

struct StripGeometry {
  double bs = 0, bi = 0;  // coefficients of the second constraint
  double half = 0;        // its half width
};

// Half spans in (nu_s, nu_i) of the parallelogram |nu_s+nu_i| <= u0,
// |bs nu_s + bi nu_i| <= h.
inline std::pair<double, double> corner_span(double u0, const StripGeometry& strip) {
  const double det = strip.bi - strip.bs;
  if (std::abs(det) < 1e-12 * (std::abs(strip.bs) + std::abs(strip.bi)))
    throw numerical_error("auto grid: group delays nearly equal; provide an explicit grid");
  double ws = 0, wi = 0;
  for (double su : {u0, -u0})
    for (double sh : {strip.half, -strip.half}) {
      ws = std::max(ws, std::abs((su * strip.bi - sh) / det));
      wi = std::max(wi, std::abs((sh - su * strip.bs) / det));
    }
  return {ws, wi};
}

}  // namespace detail

// Auto-sized grid: a coarse 64x64 pre-pass on a geometry-derived span,
// then +-4 marginal standard deviations of |f|^2 around (0, 0).
inline GridSpec auto_grid_spec(const ProcessParams& p, JsaKind kind, int n = 256,
                               double tau = std::numeric_limits<double>::quiet_NaN()) {
  p.validate();
  if (kind != JsaKind::degenerate) require_dual(p, "auto_grid_spec");

  const double u0 = 5.0 * std::hypot(p.sigma1, p.sigma2);
  detail::StripGeometry strip;
  std::function<std::complex<double>(double, double)> point;
  if (kind == JsaKind::degenerate) {
    strip = {p.tau_s, p.tau_i, 12.0 * kPi};
    const double ss = p.sigma1 * p.sigma1 + p.sigma2 * p.sigma2;
    point = [&p, ss](double ns, double ni) {
      const double u = ns + ni;
      return std::complex<double>(
          std::exp(-u * u / ss) * detail::sinc(p.tau_s * ns + p.tau_i * ni), 0.0);
    };
  } else {
    const double st = std::abs(p.sigma * p.tau_p);
    strip = {p.Ts, p.Ti, (st / 4.0 + 6.0) * st};
    const double use_tau = (kind == JsaKind::dual) ? tau : -p.tau_p / 2.0;
    if (kind == JsaKind::dual && !std::isfinite(use_tau))
      throw domain_error("auto_grid_spec: dual kind needs a finite tau");
    if (kind == JsaKind::asymptotic) {
      point = [&p](double ns, double ni) {
        const double x = (p.Ts * ns + p.Ti * ni) / (p.sigma * p.tau_p);
        const double u = ns + ni;
        return std::complex<double>(
            std::exp(-u * u / (p.sigma1 * p.sigma1 + p.sigma2 * p.sigma2)) * std::exp(-x * x), 0.0);
      };
    } else {
      point = [&p, use_tau](double ns, double ni) { return detail::dual_point(p, use_tau, ns, ni); };
    }
  }

  const auto [ws, wi] = detail::corner_span(u0, strip);

  const int pre = 64;
  const auto axs = detail::linspace(-ws, ws, pre);
  const auto axi = detail::linspace(-wi, wi, pre);
  std::vector<double> msum(pre, 0.0), isum(pre, 0.0);
  double total = 0.0;
  for (int m = 0; m < pre; ++m)
    for (int k = 0; k < pre; ++k) {
      const double w2 = std::norm(point(axs[m], axi[k]));
      msum[m] += w2;
      isum[k] += w2;
      total += w2;
    }
  if (!(total > 0.0)) throw numerical_error("auto grid: pre-pass saw an all-zero JSA");
  double es = 0, es2 = 0, ei = 0, ei2 = 0;
  for (int m = 0; m < pre; ++m) {
    es += msum[m] * axs[m];
    es2 += msum[m] * axs[m] * axs[m];
    ei += isum[m] * axi[m];
    ei2 += isum[m] * axi[m] * axi[m];
  }
  const double std_s = std::sqrt(std::max(es2 / total - (es / total) * (es / total), 0.0));
  const double std_i = std::sqrt(std::max(ei2 / total - (ei / total) * (ei / total), 0.0));
  if (!(std_s > 0.0 && std_i > 0.0)) throw numerical_error("auto grid: degenerate marginal widths");

  GridSpec spec;
  spec.n_s = spec.n_i = n;
  spec.s_min = -4.0 * std_s;
  spec.s_max = 4.0 * std_s;
  spec.i_min = -4.0 * std_i;
  spec.i_max = 4.0 * std_i;
  return spec;
}

}  // namespace sfwm
