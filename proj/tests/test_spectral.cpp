#include <catch2/catch_amalgamated.hpp>
#include <complex>
#include <random>

#include "sfwm/analysis.hpp"
#include "sfwm/spectral.hpp"
#include "support/oracles.hpp"

using namespace sfwm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

FiberSpec pm_fiber(double length_mm = 16.0) {
  FiberSpec f;
  f.length_mm = length_mm;
  f.birefringence = 3.5e-4;
  return f;
}

// synthetic dual-pump parameters decoupled from any fiber
ProcessParams synthetic_params(double sigma1, double sigma2, double tau_s, double tau_i,
                               double tau_p) {
  ProcessParams p;
  p.sigma1 = sigma1;
  p.sigma2 = sigma2;
  p.sigma = sigma1 * sigma2 / std::hypot(sigma1, sigma2);
  p.tau_s = tau_s;
  p.tau_i = tau_i;
  p.tau_p = tau_p;
  const double w = (sigma1 * sigma1 - sigma2 * sigma2) / (sigma1 * sigma1 + sigma2 * sigma2);
  p.Ts = tau_s + w * tau_p / 2.0;
  p.Ti = tau_i + w * tau_p / 2.0;
  p.omega_s = 3000.0;
  p.omega_i = 2400.0;
  p.length_mm = 16.0;
  return p;
}

double grid_intensity_integral(const JsaGrid& g) {
  long double acc = 0.0L;
  for (Eigen::Index m = 0; m < g.amp.rows(); ++m)
    for (Eigen::Index n = 0; n < g.amp.cols(); ++n) acc += std::norm(g.amp(m, n));
  return double(acc) * g.dnu_s() * g.dnu_i();
}

}  // namespace

TEST_CASE("process params: degenerate pumps, equal bandwidths, length scaling", "[spectral]") {
  const auto pump = PumpPulse::from_fwhm_nm(715.0, 8.0);
  const auto p = process_params(pm_fiber(), pump, pump);
  CHECK(p.tau_p == 0.0);
  CHECK(p.Ts == p.tau_s);  // sigma1 = sigma2
  CHECK(p.Ti == p.tau_i);

  const auto p1 = PumpPulse::from_fwhm_nm(772.0, 8.0);
  const auto p2 = PumpPulse::from_fwhm_nm(622.0, 2.0);
  const auto a = process_params(pm_fiber(16.0), p1, p2);
  const auto b = process_params(pm_fiber(32.0), p1, p2);
  CHECK_THAT(b.tau_s, WithinRel(2.0 * a.tau_s, 1e-10));
  CHECK_THAT(b.tau_i, WithinRel(2.0 * a.tau_i, 1e-10));
  CHECK_THAT(b.tau_p, WithinRel(2.0 * a.tau_p, 1e-10));

  // equal sigma with nonzero walkoff also leaves the weighted delays plain
  PumpPulse q2{622.0, p1.sigma, 0.0};
  const auto c = process_params(pm_fiber(), p1, q2);
  CHECK(c.tau_p != 0.0);
  CHECK(c.Ts == c.tau_s);
  CHECK(c.Ti == c.tau_i);
}

TEST_CASE("jsa_dual at the overlap delay matches jsa_overlap_max pointwise", "[spectral]") {
  const auto p = synthetic_params(2.0, 1.0, 0.7, -0.6, 2.5);
  const GridSpec spec = auto_grid_spec(p, JsaKind::overlap_max, 64);
  const JsaGrid a = jsa_overlap_max(p, spec);
  const JsaGrid b = jsa_dual(p, -p.tau_p / 2.0, spec);
  REQUIRE(a.amp.rows() == b.amp.rows());
  CHECK((a.amp - b.amp).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("jsa_dual vanishes at large delay", "[spectral]") {
  const auto p = synthetic_params(2.0, 1.0, 0.6, -0.5, 3.0);
  const GridSpec spec = auto_grid_spec(p, JsaKind::overlap_max, 64);
  const JsaGrid pk = jsa_overlap_max(p, spec);
  const double tau_far = 10.0 * (1.0 / p.sigma + std::abs(p.tau_p));
  const JsaGrid far = jsa_dual(p, tau_far, spec);
  CHECK(far.amp.cwiseAbs().maxCoeff() < 1e-6 * pk.amp.cwiseAbs().maxCoeff());
}

TEST_CASE("jsa_dual rejects degenerate configuration and bad tau", "[spectral]") {
  auto p = synthetic_params(2.0, 2.0, 0.5, -0.5, 0.0);
  GridSpec spec;
  spec.n_s = spec.n_i = 16;
  spec.s_min = spec.i_min = -1;
  spec.s_max = spec.i_max = 1;
  CHECK_THROWS_AS(jsa_dual(p, 0.0, spec), degenerate_config_error);
  CHECK_THROWS_AS(jsa_overlap_max(p, spec), degenerate_config_error);
  CHECK_THROWS_AS(jsa_asymptotic(p, spec), degenerate_config_error);
  CHECK_THROWS_AS(pair_probability_ratio(0.0, 2.0, 0.0), degenerate_config_error);
  auto q = synthetic_params(2.0, 2.0, 0.5, -0.5, 1.0);
  CHECK_THROWS_AS(jsa_dual(q, std::nan(""), spec), domain_error);
}

TEST_CASE("grid intensity tracks the closed-form pair probability", "[spectral]") {
  // large walkoff keeps the 1/x tails of the window below the tolerance
  const double sigma1 = 2.0, sigma2 = 2.0;
  const double sigma = sigma1 * sigma2 / std::hypot(sigma1, sigma2);
  const auto p = synthetic_params(sigma1, sigma2, 0.9, -0.8, 12.0 / sigma);
  GridSpec spec = auto_grid_spec(p, JsaKind::overlap_max, 1024);
  const double peak_tau = -p.tau_p / 2.0;
  const double i_peak = grid_intensity_integral(jsa_dual(p, peak_tau, spec));
  for (double dtau : {0.4 / sigma, 1.0 / sigma, -0.8 / sigma, 1.6 / sigma}) {
    const double tau = peak_tau + dtau;
    const double i_tau = grid_intensity_integral(jsa_dual(p, tau, spec));
    const double ratio_grid = i_tau / i_peak;
    const double ratio_closed = pair_probability_ratio(tau, p.sigma, p.tau_p);
    CHECK_THAT(ratio_grid, WithinRel(ratio_closed, 1e-6));
  }
}

TEST_CASE("pair probability ratio: peak, tails, bounds", "[spectral]") {
  for (double tau_p : {2.0, -3.5}) {
    const double sigma = 1.7;
    CHECK(pair_probability_ratio(-tau_p / 2.0, sigma, tau_p) == 1.0);
    CHECK(pair_probability_ratio(50.0 / sigma, sigma, tau_p) < 1e-8);
    CHECK(pair_probability_ratio(-50.0 / sigma, sigma, tau_p) < 1e-8);
    for (double tau : {-4.0, -1.0, -0.3, 0.2, 1.5}) {
      const double r = pair_probability_ratio(tau, sigma, tau_p);
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
  }
}

TEST_CASE("closed form equals the transformed quadrature for random triples", "[spectral]") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double sigma = 0.5 + 2.5 * u01(rng);
    const double st = (2.0 + 10.0 * u01(rng)) * (u01(rng) < 0.5 ? -1.0 : 1.0);
    const double tau_p = st / sigma;
    const double tau =
        -tau_p / 2.0 + (2.0 * u01(rng) - 1.0) * (std::abs(tau_p) / 2.0 + 2.0 / sigma);

    const double Ts = 0.5 + u01(rng), Ti = -(0.4 + u01(rng));
    auto window = [](double x, double a_hi, double a_lo) { return erf_window(x, a_hi, a_lo); };
    const double i_tau = oracle::dual_intensity_integral(
        2.0, 2.0, Ts, Ti, sigma * tau_p, sigma * (tau + tau_p) / 2.0, sigma * tau / 2.0, window);
    const double i_pk = oracle::dual_intensity_integral(
        2.0, 2.0, Ts, Ti, sigma * tau_p, sigma * tau_p / 4.0, -sigma * tau_p / 4.0, window);
    const double expect = pair_probability_ratio(tau, sigma, tau_p);
    INFO("sigma " << sigma << " tau_p " << tau_p << " tau " << tau);
    CHECK_THAT(i_tau / i_pk, WithinRel(expect, 1e-6));
  }
}

TEST_CASE("overlap-max JSA approaches the asymptotic form at large walkoff", "[spectral]") {
  const double sigma1 = 2.0, sigma2 = 2.0;
  const double sigma = sigma1 * sigma2 / std::hypot(sigma1, sigma2);
  const auto p = synthetic_params(sigma1, sigma2, 0.8, -0.7, 20.0 / sigma);
  const GridSpec spec = auto_grid_spec(p, JsaKind::overlap_max, 256);
  const JsaGrid a = normalize(jsa_overlap_max(p, spec));
  const JsaGrid b = normalize(jsa_asymptotic(p, spec));
  const double peak = a.amp.cwiseAbs().maxCoeff();
  const double rms = std::sqrt((a.amp - b.amp).cwiseAbs2().mean());
  CHECK(rms / peak < 0.01);
}

TEST_CASE("asymptotic JSA is real and positive", "[spectral]") {
  const auto p = synthetic_params(2.0, 1.0, 0.6, -0.4, 8.0);
  const JsaGrid g = jsa_asymptotic(p, auto_grid_spec(p, JsaKind::asymptotic, 64));
  bool ok = true;
  for (Eigen::Index m = 0; m < g.amp.rows(); ++m)
    for (Eigen::Index n = 0; n < g.amp.cols(); ++n)
      ok = ok && g.amp(m, n).imag() == 0.0 && g.amp(m, n).real() > 0.0;
  CHECK(ok);
}

TEST_CASE("role swap transposes the overlap-max JSA", "[spectral]") {
  const auto p = synthetic_params(2.0, 2.0, 0.7, -0.5, 3.0);
  auto q = p;
  std::swap(q.tau_s, q.tau_i);
  std::swap(q.Ts, q.Ti);
  GridSpec spec;  // symmetric explicit grid so the axes swap onto themselves
  spec.n_s = spec.n_i = 48;
  spec.s_min = spec.i_min = -4.0;
  spec.s_max = spec.i_max = 4.0;
  const JsaGrid a = jsa_overlap_max(p, spec);
  const JsaGrid b = jsa_overlap_max(q, spec);
  CHECK((a.amp - b.amp.transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("degenerate JSA: sinc zero set, ridge limit, sidelobes", "[spectral]") {
  const double s = sigma_from_fwhm_nm(1.8, 715.0);
  const double tau_s = -0.2714, tau_i = 0.2510;
  GridSpec spec;
  spec.n_s = spec.n_i = 201;
  spec.s_min = spec.i_min = -30.0;
  spec.s_max = spec.i_max = 30.0;
  const JsaGrid g = jsa_degenerate(s, s, tau_s, tau_i, spec);

  // amplitude vanishes where tau_s nu_s + tau_i nu_i = m pi, m != 0
  for (int m : {1, -1, 2}) {
    const double nu_s = 5.0;
    const double nu_i = (m * kPi - tau_s * nu_s) / tau_i;
    GridSpec tiny;
    tiny.n_s = tiny.n_i = 8;
    tiny.s_min = nu_s - 1e-9;
    tiny.s_max = nu_s + 1e-9;
    tiny.i_min = nu_i - 1e-9;
    tiny.i_max = nu_i + 1e-9;
    const JsaGrid z = jsa_degenerate(s, s, tau_s, tau_i, tiny);
    CHECK(std::abs(z.amp(4, 4)) < 1e-9);
  }

  // tau_s = tau_i = 0 collapses to the anti-correlated Gaussian ridge
  const JsaGrid ridge = jsa_degenerate(s, s, 0.0, 0.0, spec);
  bool ridge_ok = true;
  for (Eigen::Index k = 0; k < ridge.amp.rows(); ++k) {
    const double u = ridge.nu_s[k] + ridge.nu_i[k];
    ridge_ok = ridge_ok && std::abs(ridge.amp(k, k).real() - std::exp(-u * u / (2 * s * s))) <
                               1e-12;
  }
  CHECK(ridge_ok);

  // sidelobes along an offset anti-diagonal: count strict local maxima
  std::vector<double> vals;
  const double offset = 1.5;
  for (Eigen::Index k = 0; k < g.amp.rows(); ++k) {
    const double nu_s = g.nu_s[k];
    const double nu_i = -nu_s + offset;
    const Eigen::Index c = Eigen::Index(
        std::clamp((nu_i - g.nu_i.front()) / g.dnu_i() + 0.5, 0.0, double(g.amp.cols() - 1)));
    vals.push_back(std::norm(g.amp(k, c)));
  }
  int maxima = 0;
  for (std::size_t k = 1; k + 1 < vals.size(); ++k)
    if (vals[k] > vals[k - 1] && vals[k] > vals[k + 1] && vals[k] > 1e-8) ++maxima;
  CHECK(maxima >= 2);
}

TEST_CASE("normalization contract on every variant", "[spectral]") {
  const auto p = synthetic_params(2.0, 1.0, 0.6, -0.5, 3.0);
  const GridSpec spec = auto_grid_spec(p, JsaKind::overlap_max, 128);
  for (const JsaGrid& g :
       {jsa_overlap_max(p, spec), jsa_asymptotic(p, spec), jsa_dual(p, 0.3, spec),
        jsa_degenerate(2.0, 1.0, 0.6, -0.5, spec)}) {
    const JsaGrid n = normalize(g);
    CHECK_THAT(grid_intensity_integral(n), WithinAbs(1.0, 1e-10));
    CHECK(n.normalized);
  }
}

TEST_CASE("jsa_dual is continuous in tau", "[spectral]") {
  const auto p = synthetic_params(2.0, 1.0, 0.6, -0.5, 3.0);
  const GridSpec spec = auto_grid_spec(p, JsaKind::overlap_max, 64);
  const JsaGrid a = jsa_dual(p, 0.2, spec);
  double prev_diff = 1e300;
  for (double delta : {1e-3, 1e-5, 1e-7}) {
    const JsaGrid b = jsa_dual(p, 0.2 + delta, spec);
    const double diff = (a.amp - b.amp).cwiseAbs().maxCoeff();
    CHECK(diff < prev_diff);
    prev_diff = diff;
  }
  CHECK(prev_diff < 1e-6);
}

TEST_CASE("intensity is even under joint detuning reflection", "[spectral]") {
  const auto p = synthetic_params(2.0, 1.0, 0.6, -0.5, 3.0);
  GridSpec spec;
  spec.n_s = spec.n_i = 49;
  spec.s_min = spec.i_min = -5.0;
  spec.s_max = spec.i_max = 5.0;
  const JsaGrid g = jsa_dual(p, 0.4, spec);
  const Eigen::Index M = g.amp.rows(), N = g.amp.cols();
  double worst = 0.0;
  for (Eigen::Index m = 0; m < M; ++m)
    for (Eigen::Index n = 0; n < N; ++n) {
      // reflection conjugates the window factor, leaving |F| unchanged
      worst = std::max(worst,
                       std::abs(std::abs(g.amp(m, n)) - std::abs(g.amp(M - 1 - m, N - 1 - n))));
    }
  CHECK(worst < 1e-13);
}

TEST_CASE("factorability metric", "[spectral]") {
  // both terms vanish
  auto z = synthetic_params(2.0, 2.0, 0.0, 0.4, 0.0);
  CHECK(factorability_metric(z) == 0.0);

  // tau_p = 0: sign equals sign of Ts * Ti
  auto a = synthetic_params(2.0, 2.0, 0.3, 0.4, 0.0);
  CHECK(factorability_metric(a) > 0.0);
  auto b = synthetic_params(2.0, 2.0, -0.3, 0.4, 0.0);
  CHECK(factorability_metric(b) < 0.0);

  // decreases across the detuning sequence of the PM fiber model
  const auto pump1 = PumpPulse::from_fwhm_nm(772.0, 8.0);
  double prev = 1e300;
  for (double lam2 : {652.0, 622.0, 585.0}) {
    const auto p = process_params(pm_fiber(), pump1, PumpPulse::from_fwhm_nm(lam2, 2.0));
    const double c = factorability_metric(p);
    CHECK(c < prev);
    prev = c;
  }
}
