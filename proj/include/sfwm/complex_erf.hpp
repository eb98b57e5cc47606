#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "sfwm/errors.hpp"

// Error function of complex argument, built on the Faddeeva function
// w(z) = exp(-z^2) erfc(-iz). The evaluation is a hybrid:
//
//   |z| <= 1   Maclaurin series of erf (no cancellation at this size);
//   |z|  > 1   Weideman-style rational approximation of w on the upper
//              half plane, reached through the symmetries
//              erf(-z) = -erf(z) and erf(conj z) = conj(erf(z)).
//
// The rational approximation samples f(t) = exp(-t^2)(L^2+t^2) on a
// tangent grid and turns the discrete cosine transform of the samples
// into polynomial coefficients in the Cayley-transformed variable
// Z = (L+iz)/(L-iz); with N = 40 terms the relative accuracy of w is at
// the few-1e-14 level over the whole upper half plane.

namespace sfwm {

namespace detail {

inline constexpr int kFaddeevaTerms = 40;

inline const std::array<double, kFaddeevaTerms>& faddeeva_coefficients() {
  static const std::array<double, kFaddeevaTerms> coeffs = [] {
    constexpr int N = kFaddeevaTerms;
    constexpr int M = 2 * N;
    const long double L = std::sqrt(static_cast<long double>(N) / std::sqrt(2.0L));
    const long double pi = 3.14159265358979323846264338327950288L;
    // f_k on t_k = L tan(pi k / (2M)), k = 0..M-1; f is even in k and
    // vanishes at k = M.
    std::array<long double, M> f{};
    for (int k = 0; k < M; ++k) {
      const long double t = L * std::tan(pi * k / (2.0L * M));
      f[k] = std::exp(-t * t) * (L * L + t * t);
    }
    std::array<double, N> a{};
    for (int n = 1; n <= N; ++n) {
      long double acc = f[0];
      for (int k = 1; k < M; ++k) acc += 2.0L * f[k] * std::cos(pi * n * k / M);
      a[n - 1] = static_cast<double>(acc / (2.0L * M));
    }
    return a;
  }();
  return coeffs;
}

}  // namespace detail

// Faddeeva function w(z), valid for Im(z) >= 0.
inline std::complex<double> faddeeva_w(std::complex<double> z) {
  constexpr int N = detail::kFaddeevaTerms;
  static const double L = std::sqrt(static_cast<double>(N) / std::sqrt(2.0));
  const auto& a = detail::faddeeva_coefficients();
  const std::complex<double> iz(-z.imag(), z.real());
  const std::complex<double> den = L - iz;
  const std::complex<double> Z = (L + iz) / den;
  std::complex<double> p = a[N - 1];
  for (int n = N - 2; n >= 0; --n) p = p * Z + a[n];
  return 2.0 * p / (den * den) + (1.0 / std::sqrt(M_PI)) / den;
}

// erf(z) for complex z. Guarded to |Im z| <= 12 so that the intermediate
// exp(Im(z)^2) stays far from overflow.
inline std::complex<double> complex_erf(std::complex<double> z) {
  if (std::abs(z.imag()) > 12.0)
    throw domain_error("complex_erf: |Im z| > 12 would overflow intermediate factors");

  bool flip_sign = false, flip_conj = false;
  if (z.real() < 0.0) {
    z = -z;
    flip_sign = true;
  }
  if (z.imag() < 0.0) {
    z = std::conj(z);
    flip_conj = true;
  }

  std::complex<double> result;
  if (std::norm(z) <= 1.0) {
    // erf(z) = (2/sqrt(pi)) sum_n (-1)^n z^(2n+1) / (n! (2n+1))
    const std::complex<double> z2 = z * z;
    std::complex<double> term = z;
    std::complex<double> sum = z;
    for (int n = 1; n < 64; ++n) {
      term *= -z2 / static_cast<double>(n);
      const std::complex<double> inc = term / static_cast<double>(2 * n + 1);
      sum += inc;
      if (std::norm(inc) < 1e-36 * std::norm(sum)) break;
    }
    result = 2.0 / std::sqrt(M_PI) * sum;
  } else {
    // erf(z) = 1 - exp(-z^2) w(iz); here Re z >= 0 so Im(iz) >= 0.
    const std::complex<double> izz(-z.imag(), z.real());
    result = 1.0 - std::exp(-z * z) * faddeeva_w(izz);
  }

  if (flip_conj) result = std::conj(result);
  if (flip_sign) result = -result;
  return result;
}

// exp(-x^2) * (erf(a_hi - ix) - erf(a_lo - ix)) for real x, evaluated
// without forming exp(x^2)-sized intermediates:
//   exp(-x^2) erf(c - ix) = exp(-x^2) - exp(-c^2) exp(2icx) w(x + ic).
// For c < 0 the reflection w(-z) = 2 exp(-z^2) - w(z) keeps the Faddeeva
// argument in the upper half plane.
inline std::complex<double> erf_window(double x, double a_hi, double a_lo) {
  auto half = [x](double c) -> std::complex<double> {
    const std::complex<double> phase(std::cos(2.0 * c * x), std::sin(2.0 * c * x));
    if (c >= 0.0)
      return std::exp(-c * c) * phase * faddeeva_w({x, c});
    return 2.0 * std::exp(-x * x) - std::exp(-c * c) * phase * std::conj(faddeeva_w({x, -c}));
  };
  return half(a_lo) - half(a_hi);
}

}  // namespace sfwm
