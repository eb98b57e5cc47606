#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sfwm/errors.hpp"
#include "sfwm/measurement.hpp"
#include "sfwm/spectral.hpp"

// Forward model of photon-count curves vs pump delay, second-order
// correlation estimators and a Poisson synthetic-experiment generator.

namespace sfwm {

// The eight shared parameters of the count model.
struct CountModelParams {
  double noise_s = 0.0, noise_i = 0.0;  // N_s, N_i counts per acquisition
  double eta_s = 0.0, eta_i = 0.0;      // detection efficiencies
  double p_max = 0.0;                   // peak pair probability per pulse
  double sigma = 0.0;                   // rad/ps
  double tau_p = 0.0;                   // ps
  double tau_c = 0.0;                   // ps, stage delay at tau = 0

  void validate() const {
    if (noise_s < 0.0 || noise_i < 0.0) throw domain_error("CountModelParams: negative noise");
    if (eta_s < 0.0 || eta_s > 1.0 || eta_i < 0.0 || eta_i > 1.0)
      throw domain_error("CountModelParams: efficiencies must be in [0, 1]");
    if (p_max < 0.0 || p_max > 0.1)
      throw domain_error("CountModelParams: p_max outside [0, 0.1] (perturbative validity)");
    if (!(sigma > 0.0)) throw domain_error("CountModelParams: sigma must be > 0");
    if (tau_p == 0.0) throw domain_error("CountModelParams: tau_p must be nonzero");
  }
};

struct CountRecord {
  double tau_exp_ps = 0.0;  // stage delay
  long long c_s = 0, c_i = 0, c_si = 0;
  long long pulses = 0;  // R, dual-pump pulse pairs in the acquisition
  double scale = 1.0;    // gating scale already applied to the singles

  void validate() const {
    if (pulses <= 0) throw domain_error("CountRecord: pulse count must be positive");
    if (c_s < 0 || c_i < 0 || c_si < 0) throw domain_error("CountRecord: negative counts");
    if (c_si > std::min(c_s, c_i))
      throw domain_error("CountRecord: coincidences exceed a singles channel");
  }
};

struct TripleCountRecord {
  long long c_s = 0, c_sp = 0, c_i = 0;
  long long c_si = 0, c_ssp = 0, c_spi = 0;
  long long c_sspi = 0;
  long long pulses = 0;

  void validate() const {
    if (pulses <= 0) throw domain_error("TripleCountRecord: pulse count must be positive");
    for (long long v : {c_s, c_sp, c_i, c_si, c_ssp, c_spi, c_sspi})
      if (v < 0) throw domain_error("TripleCountRecord: negative counts");
    if (c_si > std::min(c_s, c_i) || c_ssp > std::min(c_s, c_sp) || c_spi > std::min(c_sp, c_i))
      throw domain_error("TripleCountRecord: twofold coincidences exceed singles");
    if (c_sspi > std::min({c_si, c_ssp, c_spi}))
      throw domain_error("TripleCountRecord: threefolds exceed twofolds");
  }
};

struct ExpectedCounts {
  double c_s = 0.0, c_i = 0.0, c_si = 0.0;
};

// Mean counts at stage delay tau_exp over R pulse pairs. The coincidence
// mean combines accidentals, pair-noise cross terms and true pairs.
inline ExpectedCounts expected_counts(const CountModelParams& q, double tau_exp, long long R) {
  q.validate();
  if (R <= 0) throw domain_error("expected_counts: pulse count must be positive");
  const double p = q.p_max * pair_probability_ratio(tau_exp - q.tau_c, q.sigma, q.tau_p);
  ExpectedCounts e;
  const double r = double(R);
  e.c_s = q.noise_s + q.eta_s * p * r;
  e.c_i = q.noise_i + q.eta_i * p * r;
  e.c_si = q.noise_s * q.noise_i / r + (1.0 - q.eta_s) * p * q.noise_i +
           (1.0 - q.eta_i) * p * q.noise_s + q.eta_s * q.eta_i * p * r;
  return e;
}

// g2_si = C_si R / (C_s C_i), with a first-order Poisson error. Scaled
// singles carry variance scale * C.
inline ValueWithError cross_correlation(const CountRecord& rec) {
  rec.validate();
  if (rec.c_s <= 0 || rec.c_i <= 0)
    throw estimator_error("cross_correlation: zero singles, estimator undefined");
  ValueWithError g2;
  g2.value = double(rec.c_si) * double(rec.pulses) / (double(rec.c_s) * double(rec.c_i));
  const double var_rel_singles = rec.scale / double(rec.c_s) + rec.scale / double(rec.c_i);
  if (rec.c_si > 0)
    g2.stderr_ = g2.value * std::sqrt(1.0 / double(rec.c_si) + var_rel_singles);
  else
    g2.stderr_ = double(rec.pulses) / (double(rec.c_s) * double(rec.c_i));
  return g2;
}

// Heralded autocorrelation g2_ss'|i = C_ss'i C_i / (C_si C_s'i).
inline ValueWithError conditional_autocorr(const TripleCountRecord& rec) {
  rec.validate();
  if (rec.c_si <= 0 || rec.c_spi <= 0)
    throw estimator_error("conditional_autocorr: zero coincidence denominator");
  ValueWithError g2;
  g2.value = double(rec.c_sspi) * double(rec.c_i) / (double(rec.c_si) * double(rec.c_spi));
  const double base =
      1.0 / double(rec.c_i) + 1.0 / double(rec.c_si) + 1.0 / double(rec.c_spi);
  if (rec.c_sspi > 0)
    g2.stderr_ = g2.value * std::sqrt(1.0 / double(rec.c_sspi) + base);
  else
    g2.stderr_ = double(rec.c_i) / (double(rec.c_si) * double(rec.c_spi));
  return g2;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Sub-seed for scan point k: splitmix64(seed ^ splitmix64(k + 1)). Points
// can therefore be generated independently (and in parallel) while the
// full scan stays reproducible from the single master seed.
inline std::uint64_t scan_point_seed(std::uint64_t seed, std::size_t k) {
  return splitmix64(seed ^ splitmix64(std::uint64_t(k) + 1));
}

// Poisson-samples one record per delay. Coincidences are drawn first and
// embedded into both singles streams, which preserves the Eq.-level means
// and guarantees C_si <= min(C_s, C_i).
inline std::vector<CountRecord> simulate_counts(const CountModelParams& q,
                                                const std::vector<double>& taus, long long R,
                                                std::uint64_t seed) {
  q.validate();
  if (R <= 0) throw domain_error("simulate_counts: pulse count must be positive");
  std::vector<CountRecord> out;
  out.reserve(taus.size());
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const ExpectedCounts e = expected_counts(q, taus[k], R);
    if (e.c_si > e.c_s || e.c_si > e.c_i)
      throw domain_error("simulate_counts: coincidence mean exceeds a singles mean; "
                         "noise rates are outside the perturbative model");
    std::mt19937_64 rng(scan_point_seed(seed, k));
    auto pois = [&rng](double mean) -> long long {
      if (mean <= 0.0) return 0;
      return std::poisson_distribution<long long>(mean)(rng);
    };
    CountRecord rec;
    rec.tau_exp_ps = taus[k];
    rec.pulses = R;
    rec.c_si = pois(e.c_si);
    rec.c_s = rec.c_si + pois(e.c_s - e.c_si);
    rec.c_i = rec.c_si + pois(e.c_i - e.c_si);
    out.push_back(rec);
  }
  return out;
}

}  // namespace sfwm
