#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sfwm/analysis.hpp"
#include "sfwm/config.hpp"
#include "sfwm/counts.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/fit.hpp"
#include "sfwm/io.hpp"
#include "sfwm/purity.hpp"
#include "sfwm/spectral.hpp"
#include "sfwm/svg.hpp"

// The four subcommand implementations. Each takes parsed inputs, writes
// its output files under out_dir and returns the computed values so tests
// can assert on them directly.

namespace sfwm {

namespace detail {

inline std::string trim_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

struct JsdRow {
  double detuning_nm = 0.0;
  double lambda_s_nm = 0.0, lambda_i_nm = 0.0;
  double purity = 0.0, purity_half_grid = 0.0;
  double schmidt_number = 0.0;
  double factorability = 0.0;  // rad^2
  double sigma_tau_p = 0.0;
  bool degenerate = false;
};

inline std::vector<JsdRow> cmd_jsd(const RunConfig& cfg, const std::string& out_dir,
                                   bool write_svg = true) {
  if (!cfg.pump1) throw config_error("jsd: config needs a pump1 block");
  std::filesystem::create_directories(out_dir);
  const std::uint64_t hash = fnv1a64(cfg.config_text);

  struct Run {
    double detuning = 0.0;
    PumpPulse pump2;
  };
  std::vector<Run> runs;
  if (!cfg.jsd_detunings_nm.empty()) {
    if (!cfg.pump2) throw config_error("jsd: detuning batch needs a pump2 block for the bandwidth");
    for (double d : cfg.jsd_detunings_nm) {
      PumpPulse p2 = *cfg.pump2;
      p2.wavelength_nm = cfg.pump1->wavelength_nm - d;
      if (d == 0.0) p2 = *cfg.pump1;  // single-pump row
      p2.validate();
      runs.push_back({d, p2});
    }
  } else {
    if (!cfg.pump2) throw config_error("jsd: config needs a pump2 block (or jsd.detunings_nm)");
    runs.push_back({cfg.pump1->wavelength_nm - cfg.pump2->wavelength_nm, *cfg.pump2});
  }

  std::vector<JsdRow> rows;
  std::string summary = version_header(hash);
  summary +=
      "detuning_nm,lambda_s_nm,lambda_i_nm,purity,purity_half_grid,schmidt_number,"
      "factorability_rad2,sigma_tau_p\n";

  for (const Run& run : runs) {
    const bool degen = run.pump2.wavelength_nm == cfg.pump1->wavelength_nm;
    const ProcessParams p = process_params(cfg.fiber, *cfg.pump1, run.pump2);

    JsaGrid grid;
    if (degen) {
      const GridSpec spec = auto_grid_spec(p, JsaKind::degenerate, cfg.grid_n);
      grid = jsa_degenerate(p.sigma1, p.sigma2, p.tau_s, p.tau_i, spec);
    } else if (cfg.jsd_tau_ps) {
      const GridSpec spec = auto_grid_spec(p, JsaKind::dual, cfg.grid_n, *cfg.jsd_tau_ps);
      grid = jsa_dual(p, *cfg.jsd_tau_ps, spec);
    } else {
      const GridSpec spec = auto_grid_spec(p, JsaKind::overlap_max, cfg.grid_n);
      grid = jsa_overlap_max(p, spec);
    }
    grid = normalize(grid);
    const SchmidtResult sr = schmidt_purity(grid);
    const Marginals mg = marginals(grid);

    JsdRow row;
    row.detuning_nm = run.detuning;
    row.lambda_s_nm = wavelength_nm_from_omega(p.omega_s);
    row.lambda_i_nm = wavelength_nm_from_omega(p.omega_i);
    row.purity = sr.purity;
    row.purity_half_grid = purity_half_resolution(grid);
    row.schmidt_number = sr.schmidt_number;
    row.factorability = factorability_metric(p);
    row.sigma_tau_p = p.sigma * p.tau_p;
    row.degenerate = degen;
    rows.push_back(row);

    const std::string tag = detail::trim_number(run.detuning);
    const std::string base = out_dir + "/jsd_" + tag;
    atomic_write(base + ".csv", jsd_to_csv(grid, hash));
    atomic_write(base + "_amplitude.txt", jsa_to_text(grid, hash));
    atomic_write(base + "_marginal_signal.csv", marginal_to_csv(mg.nu_s, mg.weight_s, hash));
    atomic_write(base + "_marginal_idler.csv", marginal_to_csv(mg.nu_i, mg.weight_i, hash));

    nlohmann::json j;
    j["detuning_nm"] = row.detuning_nm;
    j["lambda_s_nm"] = row.lambda_s_nm;
    j["lambda_i_nm"] = row.lambda_i_nm;
    j["purity"] = row.purity;
    j["purity_half_grid"] = row.purity_half_grid;
    j["schmidt_number"] = row.schmidt_number;
    j["factorability_rad2"] = row.factorability;
    j["sigma_tau_p"] = row.sigma_tau_p;
    j["degenerate"] = degen;
    const std::size_t top = std::min<std::size_t>(16, sr.singular_values.size());
    j["singular_values"] =
        std::vector<double>(sr.singular_values.begin(), sr.singular_values.begin() + top);
    j["tool_version"] = kToolVersion;
    char hbuf[20];
    std::snprintf(hbuf, sizeof hbuf, "%016llx", (unsigned long long)hash);
    j["config_hash"] = hbuf;
    atomic_write(base + "_schmidt.json", j.dump(2) + "\n");

    if (write_svg) {
      Eigen::MatrixXd dens(grid.amp.rows(), grid.amp.cols());
      for (Eigen::Index m = 0; m < grid.amp.rows(); ++m)
        for (Eigen::Index n = 0; n < grid.amp.cols(); ++n) dens(m, n) = std::norm(grid.amp(m, n));
      atomic_write(base + ".svg", svg_heatmap(dens));
    }

    summary += detail::trim_number(row.detuning_nm) + "," + format_double(row.lambda_s_nm) + "," +
               format_double(row.lambda_i_nm) + "," + format_double(row.purity) + "," +
               format_double(row.purity_half_grid) + "," + format_double(row.schmidt_number) +
               "," + format_double(row.factorability) + "," + format_double(row.sigma_tau_p) +
               "\n";
  }
  atomic_write(out_dir + "/jsd_summary.csv", summary);
  return rows;
}

inline std::vector<CountRecord> cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  if (!cfg.count_params) throw config_error("simulate: config needs a counts block");
  if (cfg.scan_points < 2) throw config_error("simulate: config needs a scan block");
  std::filesystem::create_directories(out_dir);
  std::vector<double> taus(cfg.scan_points);
  for (int k = 0; k < cfg.scan_points; ++k)
    taus[k] = cfg.scan_tau_start_ps + (cfg.scan_tau_stop_ps - cfg.scan_tau_start_ps) * double(k) /
                                          double(cfg.scan_points - 1);
  const auto recs = simulate_counts(*cfg.count_params, taus, cfg.pulses, cfg.seed);
  atomic_write(out_dir + "/counts.csv", counts_to_csv(recs, fnv1a64(cfg.config_text)));
  return recs;
}

struct FitOutputs {
  FitResult result;
  std::string json_path;
};

inline FitOutputs cmd_fit(const std::string& csv_path, const std::string& out_dir,
                          std::optional<CountModelParams> guess = std::nullopt,
                          bool write_svg = true) {
  std::ifstream in(csv_path);
  if (!in) throw config_error("fit: cannot open " + csv_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const std::uint64_t hash = fnv1a64(text);
  const auto recs = counts_from_csv_text(text);

  const FitResult res = fit_count_curves(recs, guess);
  std::filesystem::create_directories(out_dir);

  nlohmann::json j = fit_result_to_json(res);
  j["tool_version"] = kToolVersion;
  char hbuf[20];
  std::snprintf(hbuf, sizeof hbuf, "%016llx", (unsigned long long)hash);
  j["config_hash"] = hbuf;
  const std::string json_path = out_dir + "/fit.json";
  atomic_write(json_path, j.dump(2) + "\n");

  // per-curve overlays and the g2 curve, data vs fitted model
  std::string curve_s = version_header(hash) + "tau_ps,data,model\n";
  std::string curve_i = curve_s, curve_si = curve_s;
  std::string g2csv = version_header(hash) + "tau_ps,g2_data,g2_stderr,g2_model\n";
  std::vector<CountRecord> sorted = recs;
  std::sort(sorted.begin(), sorted.end(),
            [](const CountRecord& a, const CountRecord& b) { return a.tau_exp_ps < b.tau_exp_ps; });
  std::vector<double> xs;
  std::vector<double> ys_data, ys_model, g2d, g2m;
  for (const auto& r : sorted) {
    const ExpectedCounts e = expected_counts(res.params, r.tau_exp_ps, r.pulses);
    curve_s += format_double(r.tau_exp_ps) + "," + std::to_string(r.c_s) + "," +
               format_double(e.c_s) + "\n";
    curve_i += format_double(r.tau_exp_ps) + "," + std::to_string(r.c_i) + "," +
               format_double(e.c_i) + "\n";
    curve_si += format_double(r.tau_exp_ps) + "," + std::to_string(r.c_si) + "," +
                format_double(e.c_si) + "\n";
    const ValueWithError g2 = cross_correlation(r);
    const double g2_model = e.c_si * double(r.pulses) / (e.c_s * e.c_i);
    g2csv += format_double(r.tau_exp_ps) + "," + format_double(g2.value) + "," +
             format_double(g2.stderr_) + "," + format_double(g2_model) + "\n";
    xs.push_back(r.tau_exp_ps);
    ys_data.push_back(double(r.c_si));
    ys_model.push_back(e.c_si);
    g2d.push_back(g2.value);
    g2m.push_back(g2_model);
  }
  atomic_write(out_dir + "/fit_curve_s.csv", curve_s);
  atomic_write(out_dir + "/fit_curve_i.csv", curve_i);
  atomic_write(out_dir + "/fit_curve_si.csv", curve_si);
  atomic_write(out_dir + "/fit_g2_si.csv", g2csv);
  if (write_svg) {
    atomic_write(out_dir + "/fit_overlay_si.svg",
                 svg_curves(xs, {{ys_data, "#c03020", true}, {ys_model, "#2060c0", false}}));
    atomic_write(out_dir + "/fit_g2_si.svg",
                 svg_curves(xs, {{g2d, "#c03020", true}, {g2m, "#2060c0", false}}));
  }
  return {res, json_path};
}

struct PurityReport {
  PurityInputs inputs;
  PurityBounds bounds;
  bool collapsed = false;  // single corrected value rather than an interval
  std::string row_text;
};

inline PurityReport cmd_purity(const std::string& json_path, const std::string& out_dir) {
  std::ifstream in(json_path);
  if (!in) throw config_error("purity: cannot open " + json_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const std::uint64_t hash = fnv1a64(text);
  const PurityBundle bundle = purity_bundle_from_json_text(text);

  PurityReport rep;
  rep.inputs = noise_fractions(bundle.peak, bundle.far, bundle.dark, bundle.pulses);
  rep.bounds = purity_bounds(rep.inputs);
  rep.collapsed =
      std::abs(rep.bounds.upper.value - rep.bounds.lower.value) < 1e-12;

  char buf[256];
  if (rep.collapsed)
    std::snprintf(buf, sizeof buf,
                  "P_raw = %.1f +- %.1f %%  P_noise = %.1f +- %.1f %%  r = %.3f  "
                  "P = %.1f +- %.1f %%",
                  100 * rep.inputs.p_raw.value, 100 * rep.inputs.p_raw.stderr_,
                  100 * rep.inputs.p_noise.value, 100 * rep.inputs.p_noise.stderr_,
                  rep.inputs.r(), 100 * rep.bounds.upper.value, 100 * rep.bounds.upper.stderr_);
  else
    std::snprintf(buf, sizeof buf,
                  "P_raw = %.1f +- %.1f %%  P_noise = %.1f +- %.1f %%  r = %.3f  "
                  "P in [%.1f +- %.1f, %.1f +- %.1f] %%",
                  100 * rep.inputs.p_raw.value, 100 * rep.inputs.p_raw.stderr_,
                  100 * rep.inputs.p_noise.value, 100 * rep.inputs.p_noise.stderr_,
                  rep.inputs.r(), 100 * rep.bounds.lower.value, 100 * rep.bounds.lower.stderr_,
                  100 * rep.bounds.upper.value, 100 * rep.bounds.upper.stderr_);
  rep.row_text = buf;

  std::filesystem::create_directories(out_dir);
  nlohmann::json j;
  j["p_raw"] = {{"value", rep.inputs.p_raw.value}, {"stderr", rep.inputs.p_raw.stderr_}};
  j["p_noise"] = {{"value", rep.inputs.p_noise.value}, {"stderr", rep.inputs.p_noise.stderr_}};
  j["p_det"] = {{"value", rep.inputs.p_det.value}, {"stderr", rep.inputs.p_det.stderr_}};
  j["t_s"] = rep.inputs.t_s;
  j["t_sp"] = rep.inputs.t_sp;
  j["u_s"] = rep.inputs.u_s;
  j["u_sp"] = rep.inputs.u_sp;
  j["r"] = rep.inputs.r();
  j["t"] = rep.inputs.t();
  j["u"] = rep.inputs.u();
  j["p_lower"] = {{"value", rep.bounds.lower.value}, {"stderr", rep.bounds.lower.stderr_}};
  j["p_upper"] = {{"value", rep.bounds.upper.value}, {"stderr", rep.bounds.upper.stderr_}};
  j["collapsed"] = rep.collapsed;
  j["noise_term_clamped"] = rep.bounds.noise_term_clamped;
  j["upper_exceeds_one"] = rep.bounds.upper_exceeds_one;
  j["row"] = rep.row_text;
  j["tool_version"] = kToolVersion;
  char hbuf[20];
  std::snprintf(hbuf, sizeof hbuf, "%016llx", (unsigned long long)hash);
  j["config_hash"] = hbuf;
  atomic_write(out_dir + "/purity.json", j.dump(2) + "\n");
  atomic_write(out_dir + "/purity.txt", rep.row_text + "\n");
  return rep;
}

}  // namespace sfwm
