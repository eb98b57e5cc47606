#include <catch2/catch_amalgamated.hpp>

#include "sfwm/dispersion.hpp"
#include "support/oracles.hpp"

using namespace sfwm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

FiberSpec pm_fiber() {
  FiberSpec f;
  f.length_mm = 16.0;
  f.birefringence = 3.5e-4;
  return f;
}

// direct evaluation of the published fused-silica Sellmeier sum
double silica_oracle(double lambda_nm) {
  const double l2 = (lambda_nm / 1000.0) * (lambda_nm / 1000.0);
  const double b[3] = {0.6961663, 0.4079426, 0.8974794};
  const double l[3] = {0.0684043, 0.1162414, 9.896161};
  double s = 1.0;
  for (int j = 0; j < 3; ++j) s += b[j] * l2 / (l2 - l[j] * l[j]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("fused silica index at the sodium D line", "[dispersion]") {
  const auto model = SellmeierModel::fused_silica();
  const double n = refractive_index(model, 589.29);
  CHECK_THAT(n, WithinAbs(silica_oracle(589.29), 1e-14));
  CHECK_THAT(n, WithinAbs(1.4584, 2e-4));
  CHECK(refractive_index(model, 589.29) == n);  // deterministic
}

TEST_CASE("normal dispersion over the window", "[dispersion]") {
  const auto model = SellmeierModel::fused_silica();
  CHECK(refractive_index(model, 500.0) > refractive_index(model, 1500.0));
  CHECK(refractive_index(model, 500.0) == Catch::Approx(silica_oracle(500.0)));
  CHECK(refractive_index(model, 1500.0) == Catch::Approx(silica_oracle(1500.0)));
}

TEST_CASE("index domain window", "[dispersion]") {
  const auto model = SellmeierModel::fused_silica();
  CHECK_THROWS_AS(refractive_index(model, 250.0), domain_error);
  CHECK_THROWS_AS(refractive_index(model, 2500.0), domain_error);
}

TEST_CASE("sellmeier validation rejects nonpositive coefficients", "[dispersion]") {
  SellmeierModel bad = SellmeierModel::fused_silica();
  bad.strength[1] = -0.1;
  CHECK_THROWS_AS(bad.validate(), domain_error);
}

TEST_CASE("wavenumber definition and birefringent split", "[dispersion]") {
  FiberSpec f = pm_fiber();
  for (double lam : {532.0, 715.0, 900.0, 1300.0}) {
    const double om = omega_from_wavelength_nm(lam);
    const double n = refractive_index(f.sellmeier, lam);
    CHECK_THAT(wavenumber(f, om, Axis::fast), WithinRel(n * om / kSpeedOfLightMmPs, 1e-15));
    // slow minus fast is exactly dn * omega / c
    CHECK_THAT(wavenumber(f, om, Axis::slow) - wavenumber(f, om, Axis::fast),
               WithinRel(f.birefringence * om / kSpeedOfLightMmPs, 1e-9));
  }
  FiberSpec iso = pm_fiber();
  iso.birefringence = 0.0;
  const double om = omega_from_wavelength_nm(800.0);
  CHECK(wavenumber(iso, om, Axis::fast) == wavenumber(iso, om, Axis::slow));
  CHECK_THROWS_AS(wavenumber(f, -1.0, Axis::fast), domain_error);
}

TEST_CASE("inverse group velocity: dispersionless toy model", "[dispersion]") {
  FiberSpec f = pm_fiber();
  // resonances pushed far outside the window make n effectively constant
  f.sellmeier.strength = {1.2, 1e-12, 1e-12};
  f.sellmeier.resonance_um = {1e-6, 1e-6, 1e4};
  const double n = refractive_index(f.sellmeier, 700.0);
  const double om = omega_from_wavelength_nm(700.0);
  CHECK_THAT(inverse_group_velocity(f, om, Axis::fast), WithinRel(n / kSpeedOfLightMmPs, 1e-9));
}

TEST_CASE("inverse group velocity: step convergence and slow-axis shift", "[dispersion]") {
  FiberSpec f = pm_fiber();
  const double om = omega_from_wavelength_nm(715.0);
  // Richardson-style check of the module's fixed stencil against the same
  // derivative at half step
  auto diff = [&](double h) {
    return (wavenumber(f, om + h, Axis::fast) - wavenumber(f, om - h, Axis::fast)) / (2.0 * h);
  };
  const double d1 = diff(1e-6 * om), d2 = diff(5e-7 * om);
  CHECK_THAT(inverse_group_velocity(f, om, Axis::fast), WithinRel(d1, 1e-12));
  CHECK_THAT(d2, WithinRel(d1, 1e-8));
  CHECK_THAT(inverse_group_velocity(f, om, Axis::slow) - inverse_group_velocity(f, om, Axis::fast),
             WithinRel(f.birefringence / kSpeedOfLightMmPs, 1e-12));
  CHECK_THROWS_AS(inverse_group_velocity(f, omega_from_wavelength_nm(2000.0), Axis::fast),
                  domain_error);
}

TEST_CASE("k and k' are continuous over the window", "[dispersion]") {
  FiberSpec f = pm_fiber();
  double prev_k = 0, prev_kp = 0;
  bool first = true;
  for (double lam = 400.0; lam <= 1600.0; lam += 2.0) {
    const double om = omega_from_wavelength_nm(lam);
    const double k = wavenumber(f, om, Axis::fast);
    const double kp = inverse_group_velocity(f, om, Axis::fast);
    if (!first) {
      CHECK(std::abs(k - prev_k) < 0.02 * std::abs(prev_k));
      CHECK(std::abs(kp - prev_kp) < 0.01 * std::abs(prev_kp));
    }
    prev_k = k;
    prev_kp = kp;
    first = false;
  }
}

TEST_CASE("phasematching solver honours its contract", "[dispersion]") {
  FiberSpec f = pm_fiber();
  const double om1 = omega_from_wavelength_nm(772.0);
  const double om2 = omega_from_wavelength_nm(622.0);
  const auto pm = solve_phasematching(f, om1, om2);

  CHECK(pm.omega_s > pm.omega_i);
  CHECK(pm.omega_s + pm.omega_i == om1 + om2);  // imposed exactly
  CHECK(std::abs(phase_mismatch(f, om1, om2, pm.omega_s)) < 1e-9);

  // pump exchange symmetry
  const auto pm2 = solve_phasematching(f, om2, om1);
  CHECK_THAT(pm2.omega_s, WithinRel(pm.omega_s, 1e-12));

  // stable under repeat
  const auto pm3 = solve_phasematching(f, om1, om2);
  CHECK(pm3.omega_s == pm.omega_s);
}

TEST_CASE("solver agrees with the exhaustive scan oracle", "[dispersion]") {
  FiberSpec f = pm_fiber();
  const double om1 = omega_from_wavelength_nm(772.0);
  const double om2 = omega_from_wavelength_nm(622.0);
  const auto pm = solve_phasematching(f, om1, om2);
  const double lam_solver = wavelength_nm_from_omega(pm.omega_s);

  auto mismatch = [&](double lam_s_nm) {
    return phase_mismatch(f, om1, om2, omega_from_wavelength_nm(lam_s_nm));
  };
  const double lam_mid = wavelength_nm_from_omega(0.5 * (om1 + om2)) - 1.0;
  const double lam_scan = oracle::scan_phasematch_lambda_nm(mismatch, lam_mid, 350.0);
  CHECK_THAT(lam_solver, WithinAbs(lam_scan, 2e-3));  // 1 pm grid + solver tol
}

TEST_CASE("no phasematched solution without birefringence", "[dispersion]") {
  FiberSpec f = pm_fiber();
  f.birefringence = 0.0;
  const double om = omega_from_wavelength_nm(715.0);
  CHECK_THROWS_AS(solve_phasematching(f, om, om), no_phasematch_error);
}

TEST_CASE("pumps outside the window are rejected", "[dispersion]") {
  FiberSpec f = pm_fiber();
  CHECK_THROWS_AS(
      solve_phasematching(f, omega_from_wavelength_nm(250.0), omega_from_wavelength_nm(260.0)),
      domain_error);
}
