#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <vector>

#include "sfwm/errors.hpp"
#include "sfwm/spectral.hpp"

// Schmidt-mode analysis of discretized joint spectral amplitudes.

namespace sfwm {

namespace detail {

// Fixed-order serial accumulation of sum |f|^2 * dnu_s * dnu_i.
inline long double grid_norm_sq(const JsaGrid& g) {
  long double acc = 0.0L;
  for (Eigen::Index m = 0; m < g.amp.rows(); ++m)
    for (Eigen::Index n = 0; n < g.amp.cols(); ++n) acc += (long double)std::norm(g.amp(m, n));
  return acc * (long double)g.dnu_s() * (long double)g.dnu_i();
}

inline void require_normalized(const JsaGrid& g, const char* who) {
  if (!g.normalized) throw contract_error(std::string(who) + ": grid must be normalized first");
}

inline void require_same_axes(const JsaGrid& a, const JsaGrid& b, const char* who) {
  auto close = [](double x, double y) {
    return std::abs(x - y) <= 1e-9 * std::max({std::abs(x), std::abs(y), 1e-30});
  };
  if (a.nu_s.size() != b.nu_s.size() || a.nu_i.size() != b.nu_i.size() ||
      !close(a.nu_s.front(), b.nu_s.front()) || !close(a.nu_s.back(), b.nu_s.back()) ||
      !close(a.nu_i.front(), b.nu_i.front()) || !close(a.nu_i.back(), b.nu_i.back()))
    throw axis_mismatch_error(std::string(who) +
                              ": grids have different axes; resample explicitly before comparing");
}

}  // namespace detail

inline JsaGrid normalize(const JsaGrid& grid) {
  grid.validate_axes();
  const long double n2 = detail::grid_norm_sq(grid);
  if (!(n2 > 0.0L)) throw domain_error("normalize: all-zero grid");
  JsaGrid out = grid;
  out.amp *= 1.0 / std::sqrt((double)n2);
  out.normalized = true;
  return out;
}

struct SchmidtResult {
  std::vector<double> singular_values;  // descending, sum of squares ~ 1
  double purity = 0.0;                  // sum s_k^4
  double schmidt_number = 0.0;          // 1 / purity
};

// Schmidt decomposition via SVD of the amplitude matrix scaled by
// sqrt(dnu_s dnu_i). Requires a normalized grid.
inline SchmidtResult schmidt_purity(const JsaGrid& grid) {
  detail::require_normalized(grid, "schmidt_purity");
  grid.validate_axes();
  const double scale = std::sqrt(grid.dnu_s() * grid.dnu_i());
  Eigen::MatrixXcd a = grid.amp * scale;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
  SchmidtResult res;
  res.singular_values.assign(svd.singularValues().data(),
                             svd.singularValues().data() + svd.singularValues().size());
  long double p = 0.0L;
  for (double s : res.singular_values) p += (long double)s * s * s * s;
  res.purity = (double)p;
  res.schmidt_number = 1.0 / res.purity;
  return res;
}

// Purity of the same JSA decimated 2x in both axes; the gap to the full
// value exposes the discretization error.
inline double purity_half_resolution(const JsaGrid& grid) {
  detail::require_normalized(grid, "purity_half_resolution");
  JsaGrid half;
  const auto rows = (grid.amp.rows() + 1) / 2, cols = (grid.amp.cols() + 1) / 2;
  half.amp.resize(rows, cols);
  for (Eigen::Index m = 0; m < rows; ++m)
    for (Eigen::Index n = 0; n < cols; ++n) half.amp(m, n) = grid.amp(2 * m, 2 * n);
  half.nu_s.resize(rows);
  half.nu_i.resize(cols);
  for (Eigen::Index m = 0; m < rows; ++m) half.nu_s[m] = grid.nu_s[2 * m];
  for (Eigen::Index n = 0; n < cols; ++n) half.nu_i[n] = grid.nu_i[2 * n];
  return schmidt_purity(normalize(half)).purity;
}

// Overlap integral of sqrt(|a|^2 |b|^2); 1 for identical densities.
inline double jsd_fidelity(const JsaGrid& a, const JsaGrid& b) {
  detail::require_normalized(a, "jsd_fidelity");
  detail::require_normalized(b, "jsd_fidelity");
  detail::require_same_axes(a, b, "jsd_fidelity");
  long double acc = 0.0L;
  for (Eigen::Index m = 0; m < a.amp.rows(); ++m)
    for (Eigen::Index n = 0; n < a.amp.cols(); ++n)
      acc += (long double)(std::abs(a.amp(m, n)) * std::abs(b.amp(m, n)));
  double f = (double)(acc * a.dnu_s() * a.dnu_i());
  return std::clamp(f, 0.0, 1.0);
}

// Tr(rho_a rho_b) of the reduced signal states: contract each amplitude
// over the idler axis to form the one-photon kernels, then trace the
// product.
inline double state_overlap(const JsaGrid& a, const JsaGrid& b) {
  detail::require_normalized(a, "state_overlap");
  detail::require_normalized(b, "state_overlap");
  detail::require_same_axes(a, b, "state_overlap");
  const double sa = std::sqrt(a.dnu_s() * a.dnu_i());
  const double sb = std::sqrt(b.dnu_s() * b.dnu_i());
  const Eigen::MatrixXcd ma = a.amp * sa;
  const Eigen::MatrixXcd mb = b.amp * sb;
  const Eigen::MatrixXcd rho_a = ma * ma.adjoint();
  const Eigen::MatrixXcd rho_b = mb * mb.adjoint();
  const std::complex<double> tr = (rho_a * rho_b).trace();
  return std::max(tr.real(), 0.0);
}

struct Marginals {
  std::vector<double> nu_s, weight_s;  // probability mass per signal bin
  std::vector<double> nu_i, weight_i;
};

inline Marginals marginals(const JsaGrid& grid) {
  detail::require_normalized(grid, "marginals");
  Marginals m;
  m.nu_s = grid.nu_s;
  m.nu_i = grid.nu_i;
  m.weight_s.assign(grid.nu_s.size(), 0.0);
  m.weight_i.assign(grid.nu_i.size(), 0.0);
  const double cell = grid.dnu_s() * grid.dnu_i();
  for (Eigen::Index r = 0; r < grid.amp.rows(); ++r)
    for (Eigen::Index c = 0; c < grid.amp.cols(); ++c) {
      const double w = std::norm(grid.amp(r, c)) * cell;
      m.weight_s[r] += w;
      m.weight_i[c] += w;
    }
  return m;
}

}  // namespace sfwm
