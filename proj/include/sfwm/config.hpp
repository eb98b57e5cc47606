#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sfwm/counts.hpp"
#include "sfwm/dispersion.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/spectral.hpp"

// Run configuration, read from a `key = value` file. Keys are namespaced
// (fiber.*, pump1.*, ...) and carry their units in the name. '#' starts a
// comment. Schema violations report the offending line.

namespace sfwm {

struct KeyValueFile {
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Entry> entries;
  std::string raw_text;

  static KeyValueFile parse_text(const std::string& text) {
    KeyValueFile kv;
    kv.raw_text = text;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw config_error("config line " + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw config_error("config line " + std::to_string(lineno) + ": empty key or value");
      if (kv.entries.count(key))
        throw config_error("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      kv.entries[key] = {value, lineno};
    }
    return kv;
  }

  static KeyValueFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
  }

  bool has(const std::string& key) const { return entries.count(key) != 0; }

  double require_double(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) throw config_error("config: missing required key '" + key + "'");
    return to_double(it->second, key);
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = entries.find(key);
    return it == entries.end() ? fallback : to_double(it->second, key);
  }

  std::optional<double> optional_double(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return to_double(it->second, key);
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries.find(key);
    return it == entries.end() ? fallback : it->second.value;
  }

  long long get_int(const std::string& key, long long fallback) const {
    const auto it = entries.find(key);
    if (it == entries.end()) return fallback;
    try {
      std::size_t pos = 0;
      // accept scientific notation for large pulse counts
      const double d = std::stod(it->second.value, &pos);
      if (pos != it->second.value.size()) throw std::invalid_argument("");
      const long long v = (long long)llround(d);
      if ((double)v != d && std::abs(d - (double)v) > 1e-6 * std::abs(d))
        throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw config_error("config line " + std::to_string(it->second.line) + ": key '" + key +
                         "' is not an integer");
    }
  }

  std::vector<double> get_double_list(const std::string& key) const {
    const auto it = entries.find(key);
    std::vector<double> out;
    if (it == entries.end()) return out;
    std::istringstream ss(it->second.value);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(to_double({tok, it->second.line}, key));
    return out;
  }

  void reject_unknown(const std::set<std::string>& known) const {
    for (const auto& [key, entry] : entries)
      if (!known.count(key))
        throw config_error("config line " + std::to_string(entry.line) + ": unknown key '" + key +
                           "'");
  }

 private:
  static double to_double(const Entry& e, const std::string& key) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(e.value, &pos);
      while (pos < e.value.size() && std::isspace((unsigned char)e.value[pos])) ++pos;
      if (pos != e.value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw config_error("config line " + std::to_string(e.line) + ": key '" + key +
                         "' is not a number");
    }
  }
};

struct RunConfig {
  FiberSpec fiber;
  std::optional<PumpPulse> pump1, pump2;
  int grid_n = 256;
  std::vector<double> jsd_detunings_nm;           // empty: single run at pump2
  std::optional<double> jsd_tau_ps;               // absent: maximal-overlap delay
  std::optional<CountModelParams> count_params;   // for `simulate`
  long long pulses = 0;                           // R per scan point
  double scan_tau_start_ps = 0, scan_tau_stop_ps = 0;
  int scan_points = 0;
  std::uint64_t seed = 0;
  std::string config_text;  // raw text, hashed into output headers
};

namespace detail {

inline PumpPulse parse_pump(const KeyValueFile& kv, const std::string& prefix) {
  const double lambda = kv.require_double(prefix + ".wavelength_nm");
  const auto fwhm = kv.optional_double(prefix + ".fwhm_nm");
  const auto sigma = kv.optional_double(prefix + ".sigma_rad_ps");
  if (fwhm.has_value() == sigma.has_value())
    throw config_error("config: '" + prefix +
                       "' needs exactly one bandwidth key (fwhm_nm or sigma_rad_ps)");
  PumpPulse p;
  if (fwhm)
    p = PumpPulse::from_fwhm_nm(lambda, *fwhm, kv.get_double(prefix + ".power_mw", 0.0));
  else
    p = PumpPulse{lambda, *sigma, kv.get_double(prefix + ".power_mw", 0.0)};
  p.validate();
  return p;
}

}  // namespace detail

inline RunConfig load_run_config(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::parse_file(path);
  kv.reject_unknown({
      "fiber.length_mm", "fiber.birefringence", "fiber.pump_axis",
      "sellmeier.b1", "sellmeier.b2", "sellmeier.b3",
      "sellmeier.l1_um", "sellmeier.l2_um", "sellmeier.l3_um",
      "pump1.wavelength_nm", "pump1.fwhm_nm", "pump1.sigma_rad_ps", "pump1.power_mw",
      "pump2.wavelength_nm", "pump2.fwhm_nm", "pump2.sigma_rad_ps", "pump2.power_mw",
      "grid.n", "jsd.detunings_nm", "jsd.tau_ps",
      "counts.noise_s", "counts.noise_i", "counts.eta_s", "counts.eta_i",
      "counts.p_max", "counts.sigma_rad_ps", "counts.tau_p_ps", "counts.tau_c_ps",
      "counts.pulses",
      "scan.tau_start_ps", "scan.tau_stop_ps", "scan.points",
      "seed",
  });

  RunConfig cfg;
  cfg.config_text = kv.raw_text;
  cfg.fiber.length_mm = kv.get_double("fiber.length_mm", 16.0);
  cfg.fiber.birefringence = kv.get_double("fiber.birefringence", 3.5e-4);
  const std::string axis = kv.get_string("fiber.pump_axis", "slow");
  if (axis == "slow")
    cfg.fiber.pumps_on_slow_axis = true;
  else if (axis == "fast")
    cfg.fiber.pumps_on_slow_axis = false;
  else
    throw config_error("config: fiber.pump_axis must be 'slow' or 'fast'");

  const int have_sell = int(kv.has("sellmeier.b1")) + int(kv.has("sellmeier.b2")) +
                        int(kv.has("sellmeier.b3")) + int(kv.has("sellmeier.l1_um")) +
                        int(kv.has("sellmeier.l2_um")) + int(kv.has("sellmeier.l3_um"));
  if (have_sell != 0 && have_sell != 6)
    throw config_error("config: sellmeier.* needs all six keys (b1..b3, l1_um..l3_um)");
  if (have_sell == 6) {
    cfg.fiber.sellmeier.strength = {kv.require_double("sellmeier.b1"),
                                    kv.require_double("sellmeier.b2"),
                                    kv.require_double("sellmeier.b3")};
    cfg.fiber.sellmeier.resonance_um = {kv.require_double("sellmeier.l1_um"),
                                        kv.require_double("sellmeier.l2_um"),
                                        kv.require_double("sellmeier.l3_um")};
  }
  cfg.fiber.validate();

  if (kv.has("pump1.wavelength_nm")) cfg.pump1 = detail::parse_pump(kv, "pump1");
  if (kv.has("pump2.wavelength_nm")) cfg.pump2 = detail::parse_pump(kv, "pump2");

  cfg.grid_n = int(kv.get_int("grid.n", 256));
  if (cfg.grid_n < 8) throw config_error("config: grid.n must be at least 8");
  cfg.jsd_detunings_nm = kv.get_double_list("jsd.detunings_nm");
  cfg.jsd_tau_ps = kv.optional_double("jsd.tau_ps");

  if (kv.has("counts.p_max")) {
    CountModelParams q;
    q.noise_s = kv.require_double("counts.noise_s");
    q.noise_i = kv.require_double("counts.noise_i");
    q.eta_s = kv.require_double("counts.eta_s");
    q.eta_i = kv.require_double("counts.eta_i");
    q.p_max = kv.require_double("counts.p_max");
    q.sigma = kv.require_double("counts.sigma_rad_ps");
    q.tau_p = kv.require_double("counts.tau_p_ps");
    q.tau_c = kv.get_double("counts.tau_c_ps", 0.0);
    try {
      q.validate();
    } catch (const domain_error& e) {
      throw config_error(std::string("config: counts block invalid: ") + e.what());
    }
    cfg.count_params = q;
    cfg.pulses = kv.get_int("counts.pulses", 0);
    if (cfg.pulses <= 0) throw config_error("config: counts.pulses must be a positive integer");
  }

  if (kv.has("scan.points")) {
    cfg.scan_tau_start_ps = kv.require_double("scan.tau_start_ps");
    cfg.scan_tau_stop_ps = kv.require_double("scan.tau_stop_ps");
    cfg.scan_points = int(kv.get_int("scan.points", 0));
    if (cfg.scan_points < 2 || !(cfg.scan_tau_stop_ps > cfg.scan_tau_start_ps))
      throw config_error("config: scan block needs points >= 2 and stop > start");
  }

  cfg.seed = std::uint64_t(kv.get_int("seed", 0));
  return cfg;
}

}  // namespace sfwm
