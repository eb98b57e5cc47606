#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sfwm/analysis.hpp"
#include "sfwm/counts.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/fit.hpp"
#include "sfwm/purity.hpp"
#include "sfwm/spectral.hpp"
#include "sfwm/version.hpp"

// File formats. Everything is written atomically (temp file + rename) and
// deterministically: doubles via %.17g, no timestamps. Emitted files carry
// a first line with the tool version and the config hash.

namespace sfwm {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string version_header(std::uint64_t config_hash) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "# %s v%s config=%016llx\n", kToolName, kToolVersion,
                (unsigned long long)config_hash);
  return buf;
}

inline void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw error("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

// ---- JSA text format: header lines, then one "re im" pair per grid cell,
// row-major over (nu_s, nu_i).

inline std::string jsa_to_text(const JsaGrid& g, std::uint64_t config_hash) {
  g.validate_axes();
  std::string out = version_header(config_hash);
  out += "format jsa-text 1\n";
  out += "normalized " + std::string(g.normalized ? "1" : "0") + "\n";
  out += "axis_s " + format_double(g.nu_s.front()) + " " + format_double(g.nu_s.back()) + " " +
         std::to_string(g.nu_s.size()) + " rad/ps\n";
  out += "axis_i " + format_double(g.nu_i.front()) + " " + format_double(g.nu_i.back()) + " " +
         std::to_string(g.nu_i.size()) + " rad/ps\n";
  out.reserve(out.size() + std::size_t(g.amp.size()) * 48);
  for (Eigen::Index m = 0; m < g.amp.rows(); ++m)
    for (Eigen::Index n = 0; n < g.amp.cols(); ++n) {
      out += format_double(g.amp(m, n).real());
      out += ' ';
      out += format_double(g.amp(m, n).imag());
      out += '\n';
    }
  return out;
}

inline JsaGrid jsa_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  JsaGrid g;
  std::size_t ns = 0, ni = 0;
  double s_lo = 0, s_hi = 0, i_lo = 0, i_hi = 0;
  bool have_s = false, have_i = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      continue;
    } else if (tag == "normalized") {
      int v = 0;
      ls >> v;
      g.normalized = v != 0;
    } else if (tag == "axis_s") {
      ls >> s_lo >> s_hi >> ns;
      have_s = true;
    } else if (tag == "axis_i") {
      ls >> i_lo >> i_hi >> ni;
      have_i = true;
      break;
    } else {
      throw error("jsa_from_text: unexpected header line: " + line);
    }
  }
  if (!have_s || !have_i || ns < 2 || ni < 2) throw error("jsa_from_text: incomplete header");
  g.nu_s = detail::linspace(s_lo, s_hi, int(ns));
  g.nu_i = detail::linspace(i_lo, i_hi, int(ni));
  g.amp.resize(Eigen::Index(ns), Eigen::Index(ni));
  for (std::size_t m = 0; m < ns; ++m)
    for (std::size_t n = 0; n < ni; ++n) {
      double re = 0, im = 0;
      if (!(in >> re >> im)) throw error("jsa_from_text: truncated amplitude table");
      g.amp(Eigen::Index(m), Eigen::Index(n)) = {re, im};
    }
  g.validate_axes();
  return g;
}

// ---- |f|^2 heatmap CSV: first column nu_s, first row nu_i.

inline std::string jsd_to_csv(const JsaGrid& g, std::uint64_t config_hash) {
  g.validate_axes();
  std::string out = version_header(config_hash);
  out += "# joint spectral density |f|^2; rows nu_s (rad/ps), columns nu_i (rad/ps)\n";
  out += "nu_s_over_nu_i";
  for (double ni : g.nu_i) out += "," + format_double(ni);
  out += "\n";
  for (Eigen::Index m = 0; m < g.amp.rows(); ++m) {
    out += format_double(g.nu_s[std::size_t(m)]);
    for (Eigen::Index n = 0; n < g.amp.cols(); ++n)
      out += "," + format_double(std::norm(g.amp(m, n)));
    out += "\n";
  }
  return out;
}

inline std::string marginal_to_csv(const std::vector<double>& nu, const std::vector<double>& w,
                                   std::uint64_t config_hash) {
  std::string out = version_header(config_hash);
  out += "nu_rad_ps,weight\n";
  for (std::size_t k = 0; k < nu.size(); ++k)
    out += format_double(nu[k]) + "," + format_double(w[k]) + "\n";
  return out;
}

// ---- CountRecord CSV. Header is mandatory:
//   tau_ps,C_s,C_i,C_si,R,scale
// The gating scale factor multiplies the singles at ingestion (coincidences
// are recorded at the full rate already); the applied factor is kept in
// CountRecord::scale so estimators can propagate errors on the raw counts.

inline std::string counts_to_csv(const std::vector<CountRecord>& recs,
                                 std::uint64_t config_hash) {
  std::string out = version_header(config_hash);
  out += "tau_ps,C_s,C_i,C_si,R,scale\n";
  for (const auto& r : recs) {
    out += format_double(r.tau_exp_ps) + "," + std::to_string(r.c_s) + "," +
           std::to_string(r.c_i) + "," + std::to_string(r.c_si) + "," + std::to_string(r.pulses) +
           "," + format_double(r.scale) + "\n";
  }
  return out;
}

inline std::vector<CountRecord> counts_from_csv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  std::vector<CountRecord> recs;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      const auto a = cell.find_first_not_of(" \t");
      const auto b = cell.find_last_not_of(" \t");
      cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    if (!header_seen) {
      const std::vector<std::string> want = {"tau_ps", "C_s", "C_i", "C_si", "R", "scale"};
      if (cells != std::vector<std::string>(want))
        throw config_error("counts CSV line " + std::to_string(lineno) +
                           ": header must be exactly 'tau_ps,C_s,C_i,C_si,R,scale'");
      header_seen = true;
      continue;
    }
    if (cells.size() != 6)
      throw config_error("counts CSV line " + std::to_string(lineno) + ": expected 6 columns");
    try {
      CountRecord r;
      r.tau_exp_ps = std::stod(cells[0]);
      const double scale = std::stod(cells[5]);
      if (!(scale > 0.0)) throw std::invalid_argument("scale");
      r.c_s = (long long)llround(std::stoll(cells[1]) * scale);
      r.c_i = (long long)llround(std::stoll(cells[2]) * scale);
      r.c_si = std::stoll(cells[3]);
      r.pulses = std::stoll(cells[4]);
      r.scale = scale;
      r.validate();
      recs.push_back(r);
    } catch (const domain_error& e) {
      throw config_error("counts CSV line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception&) {
      throw config_error("counts CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  if (!header_seen) throw config_error("counts CSV: missing mandatory header");
  if (recs.empty()) throw config_error("counts CSV: no data rows");
  return recs;
}

inline std::vector<CountRecord> counts_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open counts CSV: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return counts_from_csv_text(ss.str());
}

// ---- JSON records (nlohmann). TripleCountRecord schema:
// {"C_s":..,"C_sp":..,"C_i":..,"C_si":..,"C_ssp":..,"C_spi":..,"C_sspi":..,"R":..}

inline TripleCountRecord triple_from_json(const nlohmann::json& j) {
  try {
    TripleCountRecord t;
    t.c_s = j.at("C_s").get<long long>();
    t.c_sp = j.at("C_sp").get<long long>();
    t.c_i = j.at("C_i").get<long long>();
    t.c_si = j.at("C_si").get<long long>();
    t.c_ssp = j.at("C_ssp").get<long long>();
    t.c_spi = j.at("C_spi").get<long long>();
    t.c_sspi = j.at("C_sspi").get<long long>();
    t.pulses = j.at("R").get<long long>();
    t.validate();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("triple-count JSON: ") + e.what());
  }
}

// Purity bundle schema:
// {"R":..,
//  "peak": {"C_s":..,"C_sp":..,"C_ssp":..},
//  "far":  {"C_s":..,"C_sp":..,"C_ssp":..},
//  "dark": {"C_s":..,"C_sp":..,"C_ssp":..}}
struct PurityBundle {
  ArmCounts peak, far, dark;
  long long pulses = 0;
};

inline PurityBundle purity_bundle_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("purity bundle JSON: ") + e.what());
  }
  auto arm = [](const nlohmann::json& a) {
    ArmCounts c;
    c.singles_s = a.at("C_s").get<long long>();
    c.singles_sp = a.at("C_sp").get<long long>();
    c.coinc = a.at("C_ssp").get<long long>();
    return c;
  };
  try {
    PurityBundle b;
    b.pulses = j.at("R").get<long long>();
    b.peak = arm(j.at("peak"));
    b.far = arm(j.at("far"));
    b.dark = arm(j.at("dark"));
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("purity bundle JSON: ") + e.what());
  }
}

inline nlohmann::json fit_result_to_json(const FitResult& r) {
  nlohmann::json j;
  j["params"] = {{"noise_s", r.params.noise_s}, {"noise_i", r.params.noise_i},
                 {"eta_s", r.params.eta_s},     {"eta_i", r.params.eta_i},
                 {"p_max", r.params.p_max},     {"sigma_rad_ps", r.params.sigma},
                 {"tau_p_ps", r.params.tau_p},  {"tau_c_ps", r.params.tau_c}};
  j["stderr"] = {{"noise_s", r.stderrs[0]}, {"noise_i", r.stderrs[1]}, {"eta_s", r.stderrs[2]},
                 {"eta_i", r.stderrs[3]},   {"p_max", r.stderrs[4]},   {"sigma_rad_ps", r.stderrs[5]},
                 {"tau_p_ps", r.stderrs[6]}, {"tau_c_ps", r.stderrs[7]}};
  std::vector<std::vector<double>> cov(kFitParamCount, std::vector<double>(kFitParamCount));
  for (int a = 0; a < kFitParamCount; ++a)
    for (int b = 0; b < kFitParamCount; ++b) cov[a][b] = r.covariance(a, b);
  j["covariance"] = cov;
  j["reduced_chi2"] = r.reduced_chi2;
  j["cost"] = r.cost;
  j["iterations"] = r.iterations;
  j["gradient_norm"] = r.gradient_norm;
  j["converged"] = r.converged;
  return j;
}

}  // namespace sfwm
