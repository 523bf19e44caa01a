#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "catw/errors.hpp"
#include "catw/scenario.hpp"
#include "catw/verify.hpp"

// Exit codes: 0 success, 1 verification/solver failure, 2 config error,
// 3 resource infeasibility.

namespace {

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= csv.size()) {
    const size_t comma = csv.find(',', pos);
    const std::string tok =
        csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw catw::ConfigError("sweep: '" + tok + "' is not a number");
    }
    if (used != tok.size())
      throw catw::ConfigError("sweep: '" + tok + "' is not a number");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transfer simulator for cat-encoded W states across paired resonators"};
  app.footer(
      "Thread count follows OMP_NUM_THREADS; results are bit-identical for any "
      "value. Configs are JSON with frequencies in Hz and lifetimes in "
      "microseconds.");
  app.require_subcommand(1);

  std::string config_path, out_dir, axis, values_csv;
  std::uint64_t seed = 0;
  bool fast = false;

  CLI::App* run = app.add_subcommand("run", "Execute one configured scenario");
  run->add_option("--config", config_path, "JSON config path")->required();
  run->add_option("--out", out_dir, "Output directory (default '.')");
  CLI::Option* run_seed = run->add_option("--seed", seed, "Override the trajectory seed");

  CLI::App* sweep = app.add_subcommand("sweep", "Rerun one scenario across an axis");
  sweep->add_option("--config", config_path, "JSON config path")->required();
  sweep->add_option("--axis", axis, "g_cr | kappa | alpha | omega_fe | dt")->required();
  sweep->add_option("--values", values_csv, "Comma-separated axis values")->required();
  sweep->add_option("--out", out_dir, "Output directory (default '.')");
  CLI::Option* sweep_seed =
      sweep->add_option("--seed", seed, "Override the trajectory seed");

  CLI::App* check = app.add_subcommand("check", "Run the invariant suite");
  check->add_flag("--fast", fast, "Skip the integration-based items");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      catw::ExperimentConfig cfg = catw::load_config_file(config_path);
      if (run_seed->count() > 0) cfg = catw::with_seed(cfg, seed);
      const std::string dir = out_dir.empty() ? "." : out_dir;
      const catw::RunArtifacts art = catw::run_experiment(cfg, dir);
      std::printf("scenario %s: %zu samples over %.4g ns (T = %.4g ns)\n",
                  catw::scenario_name(cfg.scenario).c_str(), art.sim.rows.size(),
                  1e9 * cfg.solver.dt * double(cfg.solver.n_steps),
                  1e9 * art.t_transfer);
      std::printf("peak fidelity %.6f at t/T = %.4f; fidelity %.6f at t = T\n",
                  art.peak_fidelity, art.peak_t_over_t, art.fidelity_at_transfer);
      for (const std::string& w : art.sim.warnings)
        std::printf("warning: %s\n", w.c_str());
      std::printf("wrote %s/%s and %s/%s\n", dir.c_str(), cfg.results_name.c_str(),
                  dir.c_str(), cfg.manifest_name.c_str());
      return 0;
    }
    if (sweep->parsed()) {
      catw::ExperimentConfig cfg = catw::load_config_file(config_path);
      if (sweep_seed->count() > 0) cfg = catw::with_seed(cfg, seed);
      const std::vector<double> values = parse_values(values_csv);
      const std::string dir = out_dir.empty() ? "." : out_dir;
      const catw::SweepResult res = catw::run_sweep(cfg, axis, values, dir);
      std::printf("%-14s %-14s %-12s %s\n", axis.c_str(), "peak_fidelity",
                  "peak_t_over_T", "fidelity_at_T");
      for (const catw::SweepPoint& pt : res.points)
        std::printf("%-14.6g %-14.6f %-12.4f %.6f\n", pt.value, pt.peak_fidelity,
                    pt.peak_t_over_t, pt.fidelity_at_transfer);
      std::printf("wrote %s/sweep.csv\n", dir.c_str());
      return 0;
    }
    // check
    const catw::CheckReport rep = catw::run_checks(fast);
    std::fputs(catw::format_check_report(rep).c_str(), stdout);
    return rep.all_pass ? 0 : 1;
  } catch (const catw::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const catw::ResourceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
