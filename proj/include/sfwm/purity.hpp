#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "sfwm/errors.hpp"
#include "sfwm/measurement.hpp"

// Noise-corrected purity pipeline: autocorrelation purity estimators, the
// count fractions r/t/u, the purity bounds, and the forward mixture model
// they were derived from.

namespace sfwm {

// Singles and coincidence counts of the split signal arm at one condition
// (pump delay at peak, far delay, or pumps blocked).
struct ArmCounts {
  long long singles_s = 0;   // C_s
  long long singles_sp = 0;  // C_s'
  long long coinc = 0;       // C_ss'

  void validate() const {
    if (singles_s < 0 || singles_sp < 0 || coinc < 0)
      throw domain_error("ArmCounts: negative counts");
    if (coinc > std::min(singles_s, singles_sp))
      throw domain_error("ArmCounts: coincidences exceed singles");
  }
};

// P_meas = C_ss' R / (C_s C_s') - 1, with first-order Poisson error.
inline ValueWithError raw_purity(long long c_ssp, long long c_s, long long c_sp, long long R) {
  if (R <= 0) throw domain_error("raw_purity: pulse count must be positive");
  if (c_s <= 0 || c_sp <= 0)
    throw estimator_error("raw_purity: zero singles, estimator undefined");
  if (c_ssp < 0) throw domain_error("raw_purity: negative coincidences");
  ValueWithError p;
  const double g2 = double(c_ssp) * double(R) / (double(c_s) * double(c_sp));
  p.value = g2 - 1.0;
  if (c_ssp > 0)
    p.stderr_ = g2 * std::sqrt(1.0 / double(c_ssp) + 1.0 / double(c_s) + 1.0 / double(c_sp));
  else
    p.stderr_ = double(R) / (double(c_s) * double(c_sp));
  return p;
}

inline ValueWithError raw_purity(const ArmCounts& c, long long R) {
  return raw_purity(c.coinc, c.singles_s, c.singles_sp, R);
}

// Measured purities and count fractions feeding the bounds.
struct PurityInputs {
  ValueWithError p_raw, p_noise, p_det;
  double t_s = 0.0, t_sp = 0.0;  // noise fraction of total counts, per arm
  double u_s = 0.0, u_sp = 0.0;  // detection-noise fraction of noise, per arm

  double r_s() const { return 1.0 - t_s; }
  double r_sp() const { return 1.0 - t_sp; }
  double r() const { return std::sqrt(r_s() * r_sp()); }
  double t() const { return std::sqrt(t_s * t_sp); }
  double u() const { return std::sqrt(u_s * u_sp); }

  void validate() const {
    for (double v : {t_s, t_sp, u_s, u_sp})
      if (v < 0.0 || v > 1.0) throw domain_error("PurityInputs: fractions must be in [0, 1]");
    for (const ValueWithError* p : {&p_raw, &p_noise, &p_det})
      if (p->value < -1.0) throw domain_error("PurityInputs: purity below -1");
  }
};

// Builds PurityInputs from the three count conditions. The far-delay
// counts must not exceed the peak counts on either arm.
inline PurityInputs noise_fractions(const ArmCounts& at_peak, const ArmCounts& at_far,
                                    const ArmCounts& darks, long long R) {
  at_peak.validate();
  at_far.validate();
  darks.validate();
  if (R <= 0) throw domain_error("noise_fractions: pulse count must be positive");
  if (at_peak.singles_s <= 0 || at_peak.singles_sp <= 0)
    throw estimator_error("noise_fractions: zero peak singles");
  if (at_far.singles_s > at_peak.singles_s || at_far.singles_sp > at_peak.singles_sp)
    throw inconsistent_data_error(
        "noise_fractions: far-delay counts exceed peak counts (no peak)");

  PurityInputs in;
  in.t_s = double(at_far.singles_s) / double(at_peak.singles_s);
  in.t_sp = double(at_far.singles_sp) / double(at_peak.singles_sp);
  in.u_s = at_far.singles_s > 0 ? double(darks.singles_s) / double(at_far.singles_s) : 0.0;
  in.u_sp = at_far.singles_sp > 0 ? double(darks.singles_sp) / double(at_far.singles_sp) : 0.0;
  in.u_s = std::min(in.u_s, 1.0);
  in.u_sp = std::min(in.u_sp, 1.0);

  in.p_raw = raw_purity(at_peak, R);
  in.p_noise = (at_far.singles_s > 0 && at_far.singles_sp > 0) ? raw_purity(at_far, R)
                                                               : ValueWithError{0.0, 0.0};
  in.p_det = (darks.singles_s > 0 && darks.singles_sp > 0) ? raw_purity(darks, R)
                                                           : ValueWithError{0.0, 0.0};
  return in;
}

struct PurityBounds {
  ValueWithError lower, upper;
  bool noise_term_clamped = false;  // P_noise - u^2 P_det was negative
  bool upper_exceeds_one = false;   // statistically inconsistent input
};

// Upper and lower bounds on the true pair purity. The square-root argument
// P_noise - u^2 P_det is clamped at zero (statistical fluctuations can push
// it slightly negative); when it vanishes, or t = 0, the bounds coincide.
inline PurityBounds purity_bounds(const PurityInputs& in) {
  in.validate();
  const double r = in.r(), t = in.t(), u = in.u();
  if (!(r > 0.0)) throw inconsistent_data_error("purity_bounds: r = 0, no signal counts");

  PurityBounds out;
  const double r2 = r * r;
  out.upper.value = (in.p_raw.value - t * t * in.p_noise.value) / r2;
  out.upper.stderr_ = std::sqrt(in.p_raw.stderr_ * in.p_raw.stderr_ +
                                std::pow(t * t * in.p_noise.stderr_, 2)) /
                      r2;

  double gap_arg = in.p_noise.value - u * u * in.p_det.value;
  if (in.p_noise.value == 0.0) gap_arg = 0.0;  // no noise implies no detection-noise purity
  if (gap_arg < 0.0) {
    gap_arg = 0.0;
    out.noise_term_clamped = true;
  }
  double rad_arg = in.p_raw.value * gap_arg;
  if (rad_arg < 0.0) {
    rad_arg = 0.0;
    out.noise_term_clamped = true;
  }
  const double rad = std::sqrt(rad_arg);
  out.lower.value = out.upper.value - 2.0 * t * rad / r2;

  if (rad > 0.0) {
    const double d_praw = 1.0 / r2 - (t / r2) * gap_arg / rad;
    const double d_pnoise = -t * t / r2 - (t / r2) * in.p_raw.value / rad;
    const double d_pdet = (t / r2) * u * u * in.p_raw.value / rad;
    out.lower.stderr_ = std::sqrt(std::pow(d_praw * in.p_raw.stderr_, 2) +
                                  std::pow(d_pnoise * in.p_noise.stderr_, 2) +
                                  std::pow(d_pdet * in.p_det.stderr_, 2));
  } else {
    out.lower.stderr_ = out.upper.stderr_;
  }
  out.upper_exceeds_one = out.upper.value > 1.0 + 1e-9;
  return out;
}

// Appendix forward model of the measured raw purity: a photon-pair state
// mixed with spurious photons (pair fraction w) and diluted by detection
// noise (fractions v_s, v_s').
struct MixtureModel {
  double purity_pair = 1.0;       // P
  double purity_spurious = 0.0;   // P_spu
  double purity_detection = 0.0;  // P_det
  double pair_fraction = 1.0;     // w
  double v_s = 0.0, v_sp = 0.0;   // detection-noise fraction of total counts
  double overlap = 0.0;           // Tr(rho_s rho_spu)

  void validate() const {
    for (double p : {purity_pair, purity_spurious, purity_detection})
      if (p < 0.0 || p > 1.0) throw domain_error("MixtureModel: purity outside [0, 1]");
    for (double v : {pair_fraction, v_s, v_sp})
      if (v < 0.0 || v > 1.0) throw domain_error("MixtureModel: fraction outside [0, 1]");
    const double cap = std::sqrt(purity_pair * purity_spurious);
    if (overlap < 0.0 || overlap > cap + 1e-12)
      throw domain_error("MixtureModel: overlap outside [0, sqrt(P P_spu)]");
  }

  // Appendix fraction translations. A pure pair source (w = 1, v = 0) has
  // no noise at all; its detection fraction is taken as zero.
  double u_s() const {
    const double den = (1.0 - pair_fraction) * (1.0 - v_s) + v_s;
    return den > 0.0 ? v_s / den : 0.0;
  }
  double u_sp() const {
    const double den = (1.0 - pair_fraction) * (1.0 - v_sp) + v_sp;
    return den > 0.0 ? v_sp / den : 0.0;
  }
  double r_s() const { return pair_fraction * (1.0 - v_s); }
  double r_sp() const { return pair_fraction * (1.0 - v_sp); }
};

// The raw purity this mixture produces at the autocorrelation measurement.
inline double forward_noise_mixture(const MixtureModel& m) {
  m.validate();
  const double w = m.pair_fraction;
  const double p_tilde = w * w * m.purity_pair + (1.0 - w) * (1.0 - w) * m.purity_spurious +
                         2.0 * w * (1.0 - w) * m.overlap;
  return (1.0 - m.v_s) * (1.0 - m.v_sp) * p_tilde + m.v_s * m.v_sp * m.purity_detection;
}

// The noise purity the same mixture shows at large delay (w = 0 there).
inline double noise_purity_of(const MixtureModel& m) {
  const double us = m.u_s(), usp = m.u_sp();
  return (1.0 - us) * (1.0 - usp) * m.purity_spurious + us * usp * m.purity_detection;
}

// Derives the measurable PurityInputs a given mixture would produce
// (errors set to zero; this is the exact forward map).
inline PurityInputs inputs_from_mixture(const MixtureModel& m) {
  m.validate();
  PurityInputs in;
  in.t_s = 1.0 - m.r_s();
  in.t_sp = 1.0 - m.r_sp();
  in.u_s = m.u_s();
  in.u_sp = m.u_sp();
  in.p_raw = {forward_noise_mixture(m), 0.0};
  in.p_noise = {noise_purity_of(m), 0.0};
  in.p_det = {m.purity_detection, 0.0};
  return in;
}

}  // namespace sfwm
