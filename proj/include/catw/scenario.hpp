#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "catw/dynamics.hpp"
#include "catw/hamiltonians.hpp"

// Config-driven experiment layer. A JSON config selects one of three
// scenarios and resolves solver and system parameters; runs emit a CSV
// results table plus a JSON manifest whose embedded config reproduces the
// run bit-identically.
//
// Scenarios:
//   ideal-closed    beam-splitter Hamiltonian plus the diagonal frame
//                   generator, unitary evolution (the analytic transfer),
//   effective-open  dispersive Hamiltonian plus crosstalk and pulse-leakage
//                   error terms, with the decoherence channels,
//   full-open       interaction-picture Hamiltonian with explicit detuning
//                   phases plus the same error terms and channels.

namespace catw {

enum class Scenario { IdealClosed, EffectiveOpen, FullOpen };

std::string scenario_name(Scenario s);

struct ExperimentConfig {
  Scenario scenario = Scenario::IdealClosed;
  std::string label;

  SystemParams system;  // angular units (rad/s); configs are written in Hz
  int cutoff = 5;
  SolverConfig solver;  // dt and n_steps fully resolved
  double t_final_over_t = 1.2;

  std::string results_name = "results.csv";
  std::string manifest_name = "manifest.json";

  /// Normalized config document: every field explicit, input units (Hz,
  /// microseconds). Reparsing it reproduces this struct exactly; manifests
  /// embed it as the reproducibility contract.
  std::string echo;
};

/// Parses and validates a config document. Unknown or ill-typed fields raise
/// ConfigError naming the offending key.
ExperimentConfig load_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Copy with a different trajectory seed (echo updated to match).
ExperimentConfig with_seed(const ExperimentConfig& cfg, std::uint64_t seed);

/// Copy with one sweep axis applied. Axes:
///   g_cr      crosstalk coupling in units of the pair-hop rate lambda
///   kappa     photon loss rate on every mode, 1/s
///   alpha     cat amplitude of the encoded register
///   omega_fe  stray e-f drive amplitude, Hz
///   dt        integrator step, seconds (step count rescales to keep the
///             simulated time span)
ExperimentConfig with_axis_value(const ExperimentConfig& cfg, const std::string& axis,
                                 double value);

struct RunArtifacts {
  SimulationResult sim;
  double t_transfer = 0.0;
  double peak_fidelity = 0.0;      // square-root convention
  double peak_t_over_t = 0.0;
  double fidelity_at_transfer = 0.0;  // at the sample nearest t = T
  std::string csv_text;
  std::string manifest_text;
};

/// Executes the configured scenario. When out_dir is non-empty the results
/// CSV and manifest are written there (directories created as needed, files
/// written to a temp name and renamed).
RunArtifacts run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

struct SweepPoint {
  double value = 0.0;
  double peak_fidelity = 0.0;
  double peak_t_over_t = 0.0;
  double fidelity_at_transfer = 0.0;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepPoint> points;
  std::string csv_text;  // merged table
};

/// One run per value; points are independent and execute concurrently. Per
/// point artifacts land in out_dir/point<i>/, the merged table in
/// out_dir/sweep.csv. The first failing point aborts the sweep after all
/// points finish.
SweepResult run_sweep(const ExperimentConfig& base, const std::string& axis,
                      const std::vector<double>& values, const std::string& out_dir);

}  // namespace catw
