// Command-line front end: jsd, simulate, fit, purity.
//
// Exit codes: 0 success, 2 config/schema error, 3 numerical or
// identifiability error.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "sfwm/commands.hpp"
#include "sfwm/version.hpp"

namespace {

sfwm::RunConfig load_config(const std::string& path, std::uint64_t seed_flag, bool seed_set,
                            int grid_flag) {
  sfwm::RunConfig cfg = sfwm::load_run_config(path);
  if (seed_set) cfg.seed = seed_flag;
  if (grid_flag > 0) cfg.grid_n = grid_flag;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("dual-pump SFWM photon-pair source toolkit v") + sfwm::kToolVersion};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", csv_path, json_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int grid_n = 0;
  bool no_svg = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
      seed_set = true;
    });
    sub->add_option("--grid", grid_n, "grid points per axis (overrides grid.n)");
    sub->add_flag("--no-svg", no_svg, "skip SVG rendering");
  };

  CLI::App* jsd = app.add_subcommand("jsd", "joint spectral densities, purities and marginals");
  jsd->add_option("--config", config_path, "run config file")->required();
  add_common(jsd);

  CLI::App* sim = app.add_subcommand("simulate", "Poisson-sample a synthetic count scan");
  sim->add_option("--config", config_path, "run config file")->required();
  add_common(sim);

  CLI::App* fit = app.add_subcommand("fit", "multi-curve fit of a count CSV");
  fit->add_option("csv", csv_path, "CountRecord CSV (tau_ps,C_s,C_i,C_si,R,scale)")->required();
  add_common(fit);

  CLI::App* pur = app.add_subcommand("purity", "noise-corrected purity from a count bundle");
  pur->add_option("json", json_path, "JSON bundle with peak/far/dark counts and R")->required();
  add_common(pur);

  CLI11_PARSE(app, argc, argv);

  try {
    if (jsd->parsed()) {
      const auto rows = sfwm::cmd_jsd(load_config(config_path, seed, seed_set, grid_n), out_dir,
                                      !no_svg);
      for (const auto& r : rows)
        std::printf("detuning %7.4g nm: purity %.4f (half-grid %.4f), K %.3f, C %.4g rad^2\n",
                    r.detuning_nm, r.purity, r.purity_half_grid, r.schmidt_number,
                    r.factorability);
    } else if (sim->parsed()) {
      const auto recs =
          sfwm::cmd_simulate(load_config(config_path, seed, seed_set, grid_n), out_dir);
      std::printf("wrote %zu records to %s/counts.csv\n", recs.size(), out_dir.c_str());
    } else if (fit->parsed()) {
      const auto out = sfwm::cmd_fit(csv_path, out_dir, std::nullopt, !no_svg);
      const auto& p = out.result.params;
      std::printf("p_max = %.4g +- %.2g, eta_s = %.4f +- %.2g, eta_i = %.4f +- %.2g\n", p.p_max,
                  out.result.stderrs[4], p.eta_s, out.result.stderrs[2], p.eta_i,
                  out.result.stderrs[3]);
      std::printf("sigma = %.4g rad/ps, tau_p = %.4g ps, tau_c = %.4g ps, chi2/dof = %.3f\n",
                  p.sigma, p.tau_p, p.tau_c, out.result.reduced_chi2);
    } else if (pur->parsed()) {
      const auto rep = sfwm::cmd_purity(json_path, out_dir);
      std::printf("%s\n", rep.row_text.c_str());
    }
  } catch (const sfwm::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const sfwm::error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
