#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "sfwm/counts.hpp"
#include "sfwm/errors.hpp"

// Simultaneous weighted least-squares fit of the three count curves
// (signal, idler, coincidences) with the eight model parameters shared.
//
// Residuals are (C - m)/sqrt(max(m, 1)) (Poisson variance, floored at one
// count). The optimizer is a damped Gauss-Newton (Levenberg-Marquardt
// schedule) running in transformed coordinates: log for the positive
// parameters, logit for the efficiencies, so bounds never need explicit
// constraints. tau_p is kept positive; a negative-walkoff dataset is
// represented by the mirror-equivalent parameter set (identical curves).

namespace sfwm {

// Parameter packing order used for Jacobians, covariance and errors:
// [N_s, N_i, eta_s, eta_i, p_max, sigma, tau_p, tau_c].
inline constexpr int kFitParamCount = 8;

struct FitResult {
  CountModelParams params;
  std::array<double, kFitParamCount> stderrs{};
  Eigen::Matrix<double, kFitParamCount, kFitParamCount> covariance =
      Eigen::Matrix<double, kFitParamCount, kFitParamCount>::Zero();
  double reduced_chi2 = 0.0;
  double cost = 0.0;  // sum of squared weighted residuals
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

struct fit_not_converged_error : numerical_error {
  FitResult last;
  fit_not_converged_error(const std::string& msg, FitResult r)
      : numerical_error(msg), last(std::move(r)) {}
};

namespace detail {

inline std::array<double, kFitParamCount> pack(const CountModelParams& q) {
  return {q.noise_s, q.noise_i, q.eta_s, q.eta_i, q.p_max, q.sigma, q.tau_p, q.tau_c};
}

inline CountModelParams unpack(const std::array<double, kFitParamCount>& v) {
  CountModelParams q;
  q.noise_s = v[0];
  q.noise_i = v[1];
  q.eta_s = v[2];
  q.eta_i = v[3];
  q.p_max = v[4];
  q.sigma = v[5];
  q.tau_p = v[6];
  q.tau_c = v[7];
  return q;
}

// p(tau) = p_max * ratio(tau) and its partials wrt p_max, sigma, tau_p,
// tau_c. ratio = (erf(a) - erf(b)) / (2 erf(g)).
struct PairProbDerivs {
  double p = 0.0;
  double d_pmax = 0.0, d_sigma = 0.0, d_taup = 0.0, d_tauc = 0.0;
};

inline PairProbDerivs pair_prob_derivs(const CountModelParams& q, double tau_exp) {
  const double tau = tau_exp - q.tau_c;
  const double rt2 = std::sqrt(2.0);
  const double a = q.sigma * (tau + q.tau_p) / rt2;
  const double b = q.sigma * tau / rt2;
  const double g = q.sigma * q.tau_p / (2.0 * rt2);

  double num;
  if (a >= 0.0 && b >= 0.0)
    num = std::erfc(b) - std::erfc(a);
  else if (a <= 0.0 && b <= 0.0)
    num = std::erfc(-a) - std::erfc(-b);
  else
    num = std::erf(a) - std::erf(b);
  const double den = 2.0 * std::erf(g);

  const double ea = 2.0 / std::sqrt(M_PI) * std::exp(-a * a);
  const double eb = 2.0 / std::sqrt(M_PI) * std::exp(-b * b);
  const double eg = 2.0 / std::sqrt(M_PI) * std::exp(-g * g);

  const double dnum_dsigma = ea * (tau + q.tau_p) / rt2 - eb * tau / rt2;
  const double dden_dsigma = 2.0 * eg * q.tau_p / (2.0 * rt2);
  const double dnum_dtaup = ea * q.sigma / rt2;
  const double dden_dtaup = 2.0 * eg * q.sigma / (2.0 * rt2);
  const double dnum_dtau = (ea - eb) * q.sigma / rt2;

  const double ratio = num / den;
  PairProbDerivs d;
  d.p = q.p_max * std::clamp(ratio, 0.0, 1.0);
  d.d_pmax = std::clamp(ratio, 0.0, 1.0);
  d.d_sigma = q.p_max * (dnum_dsigma * den - num * dden_dsigma) / (den * den);
  d.d_taup = q.p_max * (dnum_dtaup * den - num * dden_dtaup) / (den * den);
  d.d_tauc = -q.p_max * dnum_dtau / den;  // tau = tau_exp - tau_c
  return d;
}

struct ModelPoint {
  double m = 0.0;
  std::array<double, kFitParamCount> grad{};  // dm/dtheta, packing order
};

// Means of the three curves and their parameter gradients at one record.
inline std::array<ModelPoint, 3> model_point(const CountModelParams& q, double tau_exp,
                                             double pulses) {
  const PairProbDerivs pd = pair_prob_derivs(q, tau_exp);
  const double R = pulses;
  std::array<ModelPoint, 3> out{};

  auto fill_p_terms = [&](ModelPoint& mp, double coeff) {
    mp.grad[4] += coeff * pd.d_pmax;
    mp.grad[5] += coeff * pd.d_sigma;
    mp.grad[6] += coeff * pd.d_taup;
    mp.grad[7] += coeff * pd.d_tauc;
  };

  // signal singles
  out[0].m = q.noise_s + q.eta_s * pd.p * R;
  out[0].grad[0] = 1.0;
  out[0].grad[2] = pd.p * R;
  fill_p_terms(out[0], q.eta_s * R);

  // idler singles
  out[1].m = q.noise_i + q.eta_i * pd.p * R;
  out[1].grad[1] = 1.0;
  out[1].grad[3] = pd.p * R;
  fill_p_terms(out[1], q.eta_i * R);

  // coincidences
  out[2].m = q.noise_s * q.noise_i / R + (1.0 - q.eta_s) * pd.p * q.noise_i +
             (1.0 - q.eta_i) * pd.p * q.noise_s + q.eta_s * q.eta_i * pd.p * R;
  out[2].grad[0] = q.noise_i / R + (1.0 - q.eta_i) * pd.p;
  out[2].grad[1] = q.noise_s / R + (1.0 - q.eta_s) * pd.p;
  out[2].grad[2] = -pd.p * q.noise_i + q.eta_i * pd.p * R;
  out[2].grad[3] = -pd.p * q.noise_s + q.eta_s * pd.p * R;
  fill_p_terms(out[2], (1.0 - q.eta_s) * q.noise_i + (1.0 - q.eta_i) * q.noise_s +
                           q.eta_s * q.eta_i * R);
  return out;
}

}  // namespace detail

// Weighted residual vector r and Jacobian dr/dtheta (external parameters,
// packing order). The weight's own parameter dependence is included, so
// the Jacobian is the exact derivative of the residuals as implemented.
inline void fit_residuals(const CountModelParams& q, const std::vector<CountRecord>& records,
                          Eigen::VectorXd& r,
                          Eigen::Matrix<double, Eigen::Dynamic, kFitParamCount>* jac = nullptr) {
  const int npts = int(records.size()) * 3;
  r.resize(npts);
  if (jac) jac->resize(npts, kFitParamCount);
  int row = 0;
  for (const CountRecord& rec : records) {
    const auto mps = detail::model_point(q, rec.tau_exp_ps, double(rec.pulses));
    const double data[3] = {double(rec.c_s), double(rec.c_i), double(rec.c_si)};
    for (int c = 0; c < 3; ++c, ++row) {
      const double m = mps[c].m;
      const double mt = std::max(m, 1.0);
      const double sq = std::sqrt(mt);
      r[row] = (data[c] - m) / sq;
      if (jac) {
        for (int k = 0; k < kFitParamCount; ++k) {
          double d = -mps[c].grad[k] / sq;
          if (m > 1.0) d -= (data[c] - m) * mps[c].grad[k] / (2.0 * mt * sq);
          (*jac)(row, k) = d;
        }
      }
    }
  }
}

namespace detail {

inline double logit(double x) { return std::log(x / (1.0 - x)); }
inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Eigen::Matrix<double, kFitParamCount, 1> to_internal(const CountModelParams& q) {
  Eigen::Matrix<double, kFitParamCount, 1> x;
  x << std::log(q.noise_s), std::log(q.noise_i), logit(q.eta_s), logit(q.eta_i),
      std::log(q.p_max), std::log(q.sigma), std::log(q.tau_p), q.tau_c;
  return x;
}

inline CountModelParams from_internal(const Eigen::Matrix<double, kFitParamCount, 1>& x) {
  CountModelParams q;
  q.noise_s = std::exp(x[0]);
  q.noise_i = std::exp(x[1]);
  q.eta_s = expit(x[2]);
  q.eta_i = expit(x[3]);
  q.p_max = std::exp(x[4]);
  q.sigma = std::exp(x[5]);
  q.tau_p = std::exp(x[6]);
  q.tau_c = x[7];
  return q;
}

// dtheta/dx for the chain rule into internal coordinates.
inline Eigen::Matrix<double, kFitParamCount, 1> transform_scale(const CountModelParams& q) {
  Eigen::Matrix<double, kFitParamCount, 1> s;
  s << q.noise_s, q.noise_i, q.eta_s * (1.0 - q.eta_s), q.eta_i * (1.0 - q.eta_i), q.p_max,
      q.sigma, q.tau_p, 1.0;
  return s;
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline CountModelParams initial_guess(const std::vector<CountRecord>& records) {
  std::vector<CountRecord> recs = records;
  std::sort(recs.begin(), recs.end(),
            [](const CountRecord& a, const CountRecord& b) { return a.tau_exp_ps < b.tau_exp_ps; });
  const std::size_t n = recs.size();
  const std::size_t edge = std::max<std::size_t>(1, n / 10);  // 10% per side

  std::vector<double> base_s, base_i, base_si;
  for (std::size_t k = 0; k < edge; ++k) {
    for (std::size_t idx : {k, n - 1 - k}) {
      base_s.push_back(double(recs[idx].c_s));
      base_i.push_back(double(recs[idx].c_i));
      base_si.push_back(double(recs[idx].c_si));
    }
  }
  const double n_s = std::max(median_of(base_s), 0.5);
  const double n_i = std::max(median_of(base_i), 0.5);
  const double b_si = std::max(median_of(base_si), 0.0);

  // 3-point smoothed coincidence curve
  std::vector<double> smooth(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    int cnt = 0;
    for (int d = -1; d <= 1; ++d) {
      const long long j = (long long)k + d;
      if (j >= 0 && j < (long long)n) {
        acc += double(recs[j].c_si);
        ++cnt;
      }
    }
    smooth[k] = acc / cnt;
  }
  const std::size_t peak_idx =
      std::size_t(std::max_element(smooth.begin(), smooth.end()) - smooth.begin());
  const double peak_si = smooth[peak_idx];
  if (peak_si - b_si < 3.0 * std::sqrt(b_si + 1.0))
    throw identifiability_error("fit_count_curves: no coincidence peak above baseline at 3 sigma");

  // full width of the region above half the peak excess
  const double half = b_si + 0.5 * (peak_si - b_si);
  std::size_t lo = peak_idx, hi = peak_idx;
  while (lo > 0 && smooth[lo - 1] > half) --lo;
  while (hi + 1 < n && smooth[hi + 1] > half) ++hi;
  double width = recs[hi].tau_exp_ps - recs[lo].tau_exp_ps;
  const double step = (recs.back().tau_exp_ps - recs.front().tau_exp_ps) / double(n - 1);
  width = std::max(width, 2.0 * step);

  const CountRecord& pk = recs[peak_idx];
  const double peak_s = double(pk.c_s), peak_i = double(pk.c_i);
  const double R = double(pk.pulses);

  CountModelParams q;
  q.noise_s = n_s;
  q.noise_i = n_i;
  q.eta_s = std::clamp((peak_si - b_si) / std::max(peak_i - n_i, 1.0), 1e-3, 0.95);
  q.eta_i = std::clamp((peak_si - b_si) / std::max(peak_s - n_s, 1.0), 1e-3, 0.95);
  q.p_max = std::clamp((peak_s - n_s) / std::max(q.eta_s * R, 1.0), 1e-9, 0.099);
  q.tau_p = 0.6 * width;
  q.sigma = 6.0 / width;
  q.tau_c = pk.tau_exp_ps + q.tau_p / 2.0;
  return q;
}

}  // namespace detail

inline FitResult fit_count_curves(const std::vector<CountRecord>& records,
                                  std::optional<CountModelParams> guess = std::nullopt) {
  if (records.size() < 12)
    throw identifiability_error("fit_count_curves: need at least 12 records");
  for (const auto& r : records) r.validate();

  CountModelParams q0 = guess ? *guess : detail::initial_guess(records);
  if (q0.tau_p < 0.0) {  // canonical orientation; the curves are identical
    q0.tau_c = q0.tau_c - q0.tau_p;
    q0.tau_p = -q0.tau_p;
  }
  q0.noise_s = std::max(q0.noise_s, 1e-12);
  q0.noise_i = std::max(q0.noise_i, 1e-12);
  q0.eta_s = std::clamp(q0.eta_s, 1e-9, 1.0 - 1e-9);
  q0.eta_i = std::clamp(q0.eta_i, 1e-9, 1.0 - 1e-9);
  q0.p_max = std::clamp(q0.p_max, 1e-12, 0.0999);

  using Vec8 = Eigen::Matrix<double, kFitParamCount, 1>;
  Vec8 x = detail::to_internal(q0);

  Eigen::VectorXd r;
  Eigen::Matrix<double, Eigen::Dynamic, kFitParamCount> jac;
  fit_residuals(detail::from_internal(x), records, r, &jac);
  double cost = r.squaredNorm();

  const int max_iter = 200;
  double lambda = 1e-3;
  int iter = 0;
  double grad_norm = 0.0;
  bool converged = false;

  for (; iter < max_iter; ++iter) {
    const CountModelParams q = detail::from_internal(x);
    const Vec8 scale = detail::transform_scale(q);
    Eigen::Matrix<double, Eigen::Dynamic, kFitParamCount> jint = jac;
    for (int k = 0; k < kFitParamCount; ++k) jint.col(k) *= scale[k];

    const Eigen::Matrix<double, kFitParamCount, kFitParamCount> h = jint.transpose() * jint;
    const Vec8 g = jint.transpose() * r;
    grad_norm = g.norm();
    if (grad_norm < 1e-8) {
      converged = true;
      break;
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::Matrix<double, kFitParamCount, kFitParamCount> a = h;
      for (int k = 0; k < kFitParamCount; ++k)
        a(k, k) += lambda * std::max(h(k, k), 1e-12);
      const Vec8 delta = a.ldlt().solve(-g);
      const Vec8 x_try = x + delta;
      Eigen::VectorXd r_try;
      fit_residuals(detail::from_internal(x_try), records, r_try, nullptr);
      const double cost_try = r_try.squaredNorm();
      if (std::isfinite(cost_try) && cost_try <= cost) {
        const double rel_drop = (cost - cost_try) / std::max(cost, 1e-300);
        x = x_try;
        fit_residuals(detail::from_internal(x), records, r, &jac);
        cost = cost_try;
        lambda = std::max(lambda * 0.3, 1e-14);
        stepped = true;
        if (rel_drop < 1e-10) converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (converged) break;
    if (!stepped) {
      converged = grad_norm < 1e-6;  // damped to stagnation
      break;
    }
  }

  FitResult res;
  res.params = detail::from_internal(x);
  res.cost = cost;
  res.iterations = iter;
  res.gradient_norm = grad_norm;
  res.converged = converged;

  const int dof = int(records.size()) * 3 - kFitParamCount;
  res.reduced_chi2 = dof > 0 ? cost / dof : 0.0;

  // covariance from the external-coordinate normal matrix at the optimum
  fit_residuals(res.params, records, r, &jac);
  Eigen::Matrix<double, kFitParamCount, kFitParamCount> h = jac.transpose() * jac;
  res.covariance = h.ldlt().solve(
      Eigen::Matrix<double, kFitParamCount, kFitParamCount>::Identity()) *
      res.reduced_chi2;
  res.covariance = 0.5 * (res.covariance + res.covariance.transpose()).eval();
  for (int k = 0; k < kFitParamCount; ++k)
    res.stderrs[k] = std::sqrt(std::max(res.covariance(k, k), 0.0));

  if (!converged)
    throw fit_not_converged_error("fit_count_curves: no convergence after max iterations", res);
  return res;
}

}  // namespace sfwm
