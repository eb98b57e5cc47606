#pragma once

// Independent reference implementations used only by tests. These stay
// deliberately separate from the library code paths they check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------
// erf series oracle in long double: Maclaurin series for |z| <= 5 and the
// asymptotic erfc expansion for larger |z|. Test points must avoid the gap
// and the immediate vicinity of erf zeros.

inline std::complex<long double> erf_taylor(std::complex<long double> z) {
  const std::complex<long double> z2 = z * z;
  std::complex<long double> term = z, sum = z;
  for (int n = 1; n < 220; ++n) {
    term *= -z2 / static_cast<long double>(n);
    const auto inc = term / static_cast<long double>(2 * n + 1);
    sum += inc;
    if (std::norm(inc) < 1e-72L * std::norm(sum)) break;
  }
  const long double two_over_sqrt_pi = 1.12837916709551257389615890312154517L;
  return two_over_sqrt_pi * sum;
}

inline std::complex<long double> erf_asymptotic(std::complex<long double> z) {
  // erf(z) = 1 - exp(-z^2)/(z sqrt(pi)) * sum_m (-1)^m (2m-1)!!/(2z^2)^m,
  // truncated at the smallest term. Requires Re z >= 0 and |z| large.
  const long double sqrt_pi = 1.77245385090551602729816748334114518L;
  const std::complex<long double> inv2z2 = 1.0L / (2.0L * z * z);
  std::complex<long double> term = 1.0L, sum = 1.0L;
  long double best = 1e400L;
  for (int m = 1; m < 60; ++m) {
    term *= -static_cast<long double>(2 * m - 1) * inv2z2;
    if (std::abs(term) > best) break;  // divergent tail reached
    best = std::abs(term);
    sum += term;
  }
  return 1.0L - std::exp(-z * z) / (z * sqrt_pi) * sum;
}

inline std::complex<double> erf_series(std::complex<double> zd) {
  std::complex<long double> z(zd.real(), zd.imag());
  bool neg = false, conj = false;
  if (z.real() < 0.0L) {
    z = -z;
    neg = true;
  }
  if (z.imag() < 0.0L) {
    z = std::conj(z);
    conj = true;
  }
  std::complex<long double> r;
  if (std::abs(z) <= 5.0L)
    r = erf_taylor(z);
  else
    r = erf_asymptotic(z);
  if (conj) r = std::conj(r);
  if (neg) r = -r;
  return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
}

// ---------------------------------------------------------------------
// Closed-form Schmidt purity of a real Gaussian amplitude
// f ~ exp(-(A vs^2 + 2 B vs vi + C vi^2)), from the Mehler expansion of
// the reduced one-photon kernel exp(-p(x^2+x'^2) + 2 q x x').

inline double gaussian_purity(double A, double B, double C) {
  const double p = A - B * B / (2.0 * C);
  const double q = B * B / (2.0 * C);
  const double mu = q / (p + std::sqrt(p * p - q * q));
  return (1.0 - mu) / (1.0 + mu);
}

// ---------------------------------------------------------------------
// Quadrature of |F|^2 for the dual-pump JSA in strip coordinates
// (u = vs + vi, x = (Ts vs + Ti vi)/(sigma tau_p)), with a sinh stretch in
// x to resolve the 1/x tails of the erf window. `window` must return
// exp(-x^2) (erf(a_hi - ix) - erf(a_lo - ix)).

inline double dual_intensity_integral(
    double sigma1, double sigma2, double Ts, double Ti, double sigma_tau_p, double a_hi,
    double a_lo, const std::function<std::complex<double>(double, double, double)>& window) {
  const double jac = std::abs(sigma_tau_p / (Ti - Ts));
  // u integral of exp(-2u^2/(s1^2+s2^2)) over a wide stretched range
  const double su = std::sqrt(sigma1 * sigma1 + sigma2 * sigma2);
  long double ui = 0.0L;
  const int nu = 4001;
  const double ulim = 8.0 * su;
  const double du = 2.0 * ulim / (nu - 1);
  for (int k = 0; k < nu; ++k) {
    const double u = -ulim + k * du;
    const double w = (k == 0 || k == nu - 1) ? 0.5 : 1.0;
    ui += w * std::exp(-2.0 * u * u / (su * su));
  }
  ui *= du;

  // x integral with x = sinh(t) * scale
  long double xi = 0.0L;
  const int nx = 120001;
  const double tmax = 18.0;
  const double dt = 2.0 * tmax / (nx - 1);
  for (int k = 0; k < nx; ++k) {
    const double t = -tmax + k * dt;
    const double x = std::sinh(t);
    const double w = (k == 0 || k == nx - 1) ? 0.5 : 1.0;
    xi += w * std::norm(window(x, a_hi, a_lo)) * std::cosh(t);
  }
  xi *= dt;
  return jac * static_cast<double>(ui) * static_cast<double>(xi);
}

// ---------------------------------------------------------------------
// Brute-force phasematching scan: evaluates a caller-supplied mismatch on
// a 1 nm wavelength grid and refines the bracket tenfold down to 1 pm.

inline double scan_phasematch_lambda_nm(const std::function<double(double)>& mismatch_of_lambda,
                                        double lam_hi_nm, double lam_lo_nm) {
  double step = 1.0;
  double lo = lam_hi_nm, hi = lam_lo_nm;  // scanning downward in wavelength
  bool found = false;
  double prev = mismatch_of_lambda(lam_hi_nm);
  for (double lam = lam_hi_nm - step; lam >= lam_lo_nm; lam -= step) {
    const double cur = mismatch_of_lambda(lam);
    if ((prev < 0.0) != (cur < 0.0)) {
      lo = lam + step;
      hi = lam;
      found = true;
      break;
    }
    prev = cur;
  }
  if (!found) throw std::runtime_error("scan oracle: no sign change");
  while (step > 1e-3) {  // refine to 1 pm
    step /= 10.0;
    double p = mismatch_of_lambda(lo);
    bool bracketed = false;
    for (double lam = lo - step; lam >= hi - step * 0.5; lam -= step) {
      const double cur = mismatch_of_lambda(lam);
      if ((p < 0.0) != (cur < 0.0)) {
        lo = lam + step;
        hi = lam;
        bracketed = true;
        break;
      }
      p = cur;
    }
    if (!bracketed) throw std::runtime_error("scan oracle: refinement lost the root");
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------
// Aggregated event-class Monte Carlo of the count model: draws the four
// disjoint coincidence classes (pair-detected-both, pair with one photon
// undetected plus opposite-arm noise, noise-noise) and the additive
// singles streams over R pulses.

struct McCounts {
  double c_s = 0, c_i = 0, c_si = 0;
};

inline McCounts mc_expected_counts(double noise_s, double noise_i, double eta_s, double eta_i,
                                   double p, long long R, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double nu_s = noise_s / double(R), nu_i = noise_i / double(R);
  auto binom = [&](double q) -> long long {
    if (q <= 0.0) return 0;
    return std::binomial_distribution<long long>(R, q)(rng);
  };
  McCounts m;
  const long long pair_s = binom(eta_s * p);
  const long long pair_i = binom(eta_i * p);
  m.c_s = double(pair_s + binom(nu_s));
  m.c_i = double(pair_i + binom(nu_i));
  m.c_si = double(binom(eta_s * eta_i * p) + binom((1.0 - eta_s) * p * nu_i) +
                  binom((1.0 - eta_i) * p * nu_s) + binom(nu_s * nu_i));
  return m;
}

}  // namespace oracle
