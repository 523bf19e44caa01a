#include "catw/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "catw/analysis.hpp"
#include "catw/states.hpp"

namespace catw {

namespace fs = std::filesystem;
using nlohmann::json;

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::IdealClosed: return "ideal-closed";
    case Scenario::EffectiveOpen: return "effective-open";
    case Scenario::FullOpen: return "full-open";
  }
  return "?";
}

namespace {

// -------- strict JSON access -----------------------------------------------

[[noreturn]] void bad_field(const std::string& scope, const std::string& key,
                            const std::string& what) {
  throw ConfigError("config: " + scope + key + " " + what);
}

void require_keys(const json& obj, const std::string& scope,
                  std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) { known = true; break; }
    if (!known) throw ConfigError("config: unknown key '" + scope + it.key() + "'");
  }
}

json get_object(const json& obj, const std::string& scope, const char* key) {
  if (!obj.contains(key)) return json::object();
  if (!obj.at(key).is_object()) bad_field(scope, key, "must be an object");
  return obj.at(key);
}

double get_num(const json& obj, const std::string& scope, const char* key,
               double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) bad_field(scope, key, "must be a number");
  return obj.at(key).get<double>();
}

long get_int(const json& obj, const std::string& scope, const char* key,
             long fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) bad_field(scope, key, "must be an integer");
  return obj.at(key).get<long>();
}

std::string get_str(const json& obj, const std::string& scope, const char* key,
                    const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) bad_field(scope, key, "must be a string");
  return obj.at(key).get<std::string>();
}

// Scalar broadcast or explicit per-entry list.
std::vector<double> get_num_list(const json& obj, const std::string& scope,
                                 const char* key, size_t n, double fallback) {
  if (!obj.contains(key)) return std::vector<double>(n, fallback);
  const json& v = obj.at(key);
  if (v.is_number()) return std::vector<double>(n, v.get<double>());
  if (v.is_array()) {
    if (v.size() != n)
      bad_field(scope, key, "must have " + std::to_string(n) + " entries");
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
      if (!v[i].is_number()) bad_field(scope, key, "entries must be numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }
  bad_field(scope, key, "must be a number or an array");
}

Scenario parse_scenario(const std::string& name) {
  if (name == "ideal-closed") return Scenario::IdealClosed;
  if (name == "effective-open") return Scenario::EffectiveOpen;
  if (name == "full-open") return Scenario::FullOpen;
  throw ConfigError(
      "config: scenario must be ideal-closed, effective-open or full-open (got '" +
      name + "')");
}

Method parse_method(const std::string& name) {
  if (name == "closed-rk4") return Method::ClosedRk4;
  if (name == "lindblad-rk4") return Method::LindbladRk4;
  if (name == "trajectories") return Method::Trajectories;
  throw ConfigError(
      "config: solver.method must be closed-rk4, lindblad-rk4 or trajectories (got '" +
      name + "')");
}

// Lifetime in microseconds; zero or negative disables the channel.
double rate_from_us(double lifetime_us) {
  return lifetime_us > 0.0 ? 1.0 / (lifetime_us * 1e-6) : 0.0;
}

}  // namespace

ExperimentConfig load_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  require_keys(root, "", {"scenario", "label", "units", "system", "encoding",
                          "solver", "output"});
  if (!root.contains("scenario"))
    throw ConfigError("config: missing required key 'scenario'");

  ExperimentConfig cfg;
  cfg.scenario = parse_scenario(get_str(root, "", "scenario", ""));
  cfg.label = get_str(root, "", "label", "");

  // ---- system (frequencies in Hz, lifetimes in microseconds) --------------
  const json sys = get_object(root, "", "system");
  require_keys(sys, "system.",
               {"n_pairs", "g_hz", "delta_hz", "drive_hz", "omega_eg_hz",
                "omega_fe_hz", "crosstalk_relative", "leak_drive_hz",
                "leak_detuning_hz", "kappa_inverse_us", "t1_eg_us", "t1_fe_us",
                "t1_fg_us", "tphi_e_us", "tphi_f_us"});
  const long n_pairs = get_int(sys, "system.", "n_pairs", 3);
  if (n_pairs < 1) bad_field("system.", "n_pairs", "must be >= 1");
  const size_t n_modes = 2 * static_cast<size_t>(n_pairs);

  const std::vector<double> g_hz = get_num_list(sys, "system.", "g_hz", n_modes, 150e6);
  for (double v : g_hz)
    if (v <= 0.0) bad_field("system.", "g_hz", "must be positive");

  // Scalar: magnitude, with the structural sign pattern (+ first pair,
  // - the rest). Array: one signed detuning per pair.
  std::vector<double> delta_hz(n_pairs);
  if (sys.contains("delta_hz") && sys.at("delta_hz").is_array()) {
    delta_hz = get_num_list(sys, "system.", "delta_hz", n_pairs, 0.0);
    for (double v : delta_hz)
      if (v == 0.0) bad_field("system.", "delta_hz", "entries must be nonzero");
  } else {
    const double mag = get_num(sys, "system.", "delta_hz", 450e6);
    if (mag <= 0.0)
      bad_field("system.", "delta_hz", "scalar form must be a positive magnitude");
    for (long j = 0; j < n_pairs; ++j) delta_hz[j] = j == 0 ? mag : -mag;
  }

  const double drive_hz = get_num(sys, "system.", "drive_hz", 250e6);
  const double omega_eg_hz = get_num(sys, "system.", "omega_eg_hz", 7.5e9);
  const double omega_fe_hz = get_num(sys, "system.", "omega_fe_hz", 5.0e9);
  const double crosstalk_rel = get_num(sys, "system.", "crosstalk_relative", 0.02);
  const double leak_drive_hz = get_num(sys, "system.", "leak_drive_hz", 47e6);
  const double leak_detuning_hz =
      get_num(sys, "system.", "leak_detuning_hz", omega_fe_hz - omega_eg_hz);
  const std::vector<double> kappa_inv_us =
      get_num_list(sys, "system.", "kappa_inverse_us", n_modes, 20.0);
  const double t1_eg_us = get_num(sys, "system.", "t1_eg_us", 30.0);
  const double t1_fe_us = get_num(sys, "system.", "t1_fe_us", 20.0);
  const double t1_fg_us = get_num(sys, "system.", "t1_fg_us", 60.0);
  const double tphi_e_us = get_num(sys, "system.", "tphi_e_us", 40.0);
  const double tphi_f_us = get_num(sys, "system.", "tphi_f_us", 25.0);

  SystemParams& p = cfg.system;
  p.n_pairs = static_cast<int>(n_pairs);
  p.g.resize(n_modes);
  for (size_t m = 0; m < n_modes; ++m) p.g[m] = kTwoPi * g_hz[m];
  p.delta_pair.resize(n_pairs);
  for (long j = 0; j < n_pairs; ++j) p.delta_pair[j] = kTwoPi * delta_hz[j];
  p.omega_drive = kTwoPi * drive_hz;
  p.omega_eg = kTwoPi * omega_eg_hz;
  p.omega_fe = kTwoPi * omega_fe_hz;
  p.omega_leak = kTwoPi * leak_drive_hz;
  p.delta_leak = kTwoPi * leak_detuning_hz;
  p.kappa.resize(n_modes);
  for (size_t m = 0; m < n_modes; ++m) p.kappa[m] = rate_from_us(kappa_inv_us[m]);
  p.gamma_eg = rate_from_us(t1_eg_us);
  p.gamma_fe = rate_from_us(t1_fe_us);
  p.gamma_fg = rate_from_us(t1_fg_us);
  p.gamma_phi_e = rate_from_us(tphi_e_us);
  p.gamma_phi_f = rate_from_us(tphi_f_us);
  match_mode_frequencies(p);

  const DerivedCouplings dc = derive_couplings(p);
  if (crosstalk_rel < 0.0)
    bad_field("system.", "crosstalk_relative", "must be >= 0");
  p.g_cross = crosstalk_rel * dc.lambda;

  // ---- encoding ------------------------------------------------------------
  const json enc = get_object(root, "", "encoding");
  require_keys(enc, "encoding.", {"alpha", "cutoff"});
  p.alpha = get_num(enc, "encoding.", "alpha", 0.5);
  if (p.alpha <= 0.0) bad_field("encoding.", "alpha", "must be positive");
  cfg.cutoff = static_cast<int>(get_int(
      enc, "encoding.", "cutoff", cfg.scenario == Scenario::IdealClosed ? 5 : 3));
  if (cfg.cutoff < 2) bad_field("encoding.", "cutoff", "must be >= 2");

  // ---- solver ----------------------------------------------------------------
  const json sol = get_object(root, "", "solver");
  require_keys(sol, "solver.",
               {"method", "steps_per_transfer", "dt_seconds", "t_final_over_t",
                "n_steps", "sample_stride", "trajectories", "seed", "norm_tol",
                "trace_tol"});
  const std::string default_method =
      cfg.scenario == Scenario::IdealClosed ? "closed-rk4" : "lindblad-rk4";
  cfg.solver.method = parse_method(get_str(sol, "solver.", "method", default_method));

  cfg.t_final_over_t = get_num(sol, "solver.", "t_final_over_t", 1.2);
  if (cfg.t_final_over_t < 0.0) bad_field("solver.", "t_final_over_t", "must be >= 0");

  if (sol.contains("dt_seconds") && sol.contains("steps_per_transfer"))
    throw ConfigError("config: give either solver.dt_seconds or solver.steps_per_transfer");
  if (sol.contains("dt_seconds")) {
    cfg.solver.dt = get_num(sol, "solver.", "dt_seconds", 0.0);
    if (cfg.solver.dt <= 0.0) bad_field("solver.", "dt_seconds", "must be positive");
    cfg.solver.n_steps = get_int(
        sol, "solver.", "n_steps",
        std::llround(cfg.t_final_over_t * dc.t_transfer / cfg.solver.dt));
  } else {
    const long spt = get_int(sol, "solver.", "steps_per_transfer",
                             cfg.solver.method == Method::ClosedRk4 ? 2000 : 5000);
    if (spt < 1) bad_field("solver.", "steps_per_transfer", "must be >= 1");
    cfg.solver.dt = dc.t_transfer / static_cast<double>(spt);
    cfg.solver.n_steps = get_int(sol, "solver.", "n_steps",
                                 std::llround(cfg.t_final_over_t * double(spt)));
  }
  if (cfg.solver.n_steps < 0) bad_field("solver.", "n_steps", "must be >= 0");

  cfg.solver.sample_stride =
      static_cast<int>(get_int(sol, "solver.", "sample_stride", 10));
  if (cfg.solver.sample_stride < 1)
    bad_field("solver.", "sample_stride", "must be >= 1");
  cfg.solver.n_trajectories = get_int(sol, "solver.", "trajectories", 0);
  if (cfg.solver.method == Method::Trajectories && cfg.solver.n_trajectories < 1)
    throw ConfigError("config: solver.trajectories must be >= 1 for the trajectory method");
  const long seed = get_int(sol, "solver.", "seed", 1);
  if (seed < 0) bad_field("solver.", "seed", "must be >= 0");
  cfg.solver.seed = static_cast<std::uint64_t>(seed);
  cfg.solver.norm_tol = get_num(sol, "solver.", "norm_tol", 1e-6);
  cfg.solver.trace_tol = get_num(sol, "solver.", "trace_tol", 1e-5);

  // ---- output ---------------------------------------------------------------
  const json out = get_object(root, "", "output");
  require_keys(out, "output.", {"results", "manifest"});
  cfg.results_name = get_str(out, "output.", "results", "results.csv");
  cfg.manifest_name = get_str(out, "output.", "manifest", "manifest.json");

  // ---- canonical echo ---------------------------------------------------------
  json echo;
  echo["scenario"] = scenario_name(cfg.scenario);
  echo["label"] = cfg.label;
  echo["units"] = "frequencies in Hz (omega/2pi); lifetimes in microseconds";
  echo["system"] = {{"n_pairs", n_pairs},
                    {"g_hz", g_hz},
                    {"delta_hz", delta_hz},
                    {"drive_hz", drive_hz},
                    {"omega_eg_hz", omega_eg_hz},
                    {"omega_fe_hz", omega_fe_hz},
                    {"crosstalk_relative", crosstalk_rel},
                    {"leak_drive_hz", leak_drive_hz},
                    {"leak_detuning_hz", leak_detuning_hz},
                    {"kappa_inverse_us", kappa_inv_us},
                    {"t1_eg_us", t1_eg_us},
                    {"t1_fe_us", t1_fe_us},
                    {"t1_fg_us", t1_fg_us},
                    {"tphi_e_us", tphi_e_us},
                    {"tphi_f_us", tphi_f_us}};
  echo["encoding"] = {{"alpha", p.alpha}, {"cutoff", cfg.cutoff}};
  echo["solver"] = {{"method", method_name(cfg.solver.method)},
                    {"dt_seconds", cfg.solver.dt},
                    {"n_steps", cfg.solver.n_steps},
                    {"t_final_over_t", cfg.t_final_over_t},
                    {"sample_stride", cfg.solver.sample_stride},
                    {"trajectories", cfg.solver.n_trajectories},
                    {"seed", seed},
                    {"norm_tol", cfg.solver.norm_tol},
                    {"trace_tol", cfg.solver.trace_tol}};
  echo["output"] = {{"results", cfg.results_name}, {"manifest", cfg.manifest_name}};
  cfg.echo = echo.dump(2);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_config_text(ss.str());
}

namespace {

ExperimentConfig reload_patched(const ExperimentConfig& cfg,
                                const std::function<void(json&)>& patch) {
  json root = json::parse(cfg.echo);
  patch(root);
  return load_config_text(root.dump());
}

}  // namespace

ExperimentConfig with_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  return reload_patched(cfg, [&](json& root) { root["solver"]["seed"] = seed; });
}

ExperimentConfig with_axis_value(const ExperimentConfig& cfg, const std::string& axis,
                                 double value) {
  if (axis == "g_cr") {
    if (value < 0.0) throw ConfigError("sweep: g_cr must be >= 0");
    return reload_patched(
        cfg, [&](json& root) { root["system"]["crosstalk_relative"] = value; });
  }
  if (axis == "kappa") {
    if (value < 0.0) throw ConfigError("sweep: kappa must be >= 0");
    const double inv_us = value > 0.0 ? 1e6 / value : 0.0;
    return reload_patched(
        cfg, [&](json& root) { root["system"]["kappa_inverse_us"] = inv_us; });
  }
  if (axis == "alpha") {
    return reload_patched(cfg,
                          [&](json& root) { root["encoding"]["alpha"] = value; });
  }
  if (axis == "omega_fe") {
    if (value < 0.0) throw ConfigError("sweep: omega_fe must be >= 0");
    return reload_patched(
        cfg, [&](json& root) { root["system"]["leak_drive_hz"] = value; });
  }
  if (axis == "dt") {
    if (value <= 0.0) throw ConfigError("sweep: dt must be positive");
    const double span = cfg.solver.dt * static_cast<double>(cfg.solver.n_steps);
    return reload_patched(cfg, [&](json& root) {
      root["solver"]["dt_seconds"] = value;
      root["solver"]["n_steps"] = std::llround(span / value);
    });
  }
  throw ConfigError("sweep: unknown axis '" + axis +
                    "' (expected g_cr, kappa, alpha, omega_fe or dt)");
}

namespace {

void write_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f.good()) throw ConfigError("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string make_csv(const std::vector<SampleRow>& rows, double t_transfer,
                     int n_pairs) {
  std::string out = "t_seconds,t_over_T,fidelity,fidelity_squared,trace";
  for (int k = 1; k <= n_pairs; ++k) out += ",pair" + std::to_string(k) + "_n";
  out += ",pop_g,pop_e,pop_f\n";
  for (const SampleRow& r : rows) {
    const double fsq = std::max(r.fidelity_sq, 0.0);
    out += fmt(r.t) + ',' + fmt(r.t / t_transfer) + ',' + fmt(std::sqrt(fsq)) +
           ',' + fmt(r.fidelity_sq) + ',' + fmt(r.trace);
    for (double pn : r.pair_n) out += ',' + fmt(pn);
    out += ',' + fmt(r.pop_g) + ',' + fmt(r.pop_e) + ',' + fmt(r.pop_f) + '\n';
  }
  return out;
}

const char* hamiltonian_label(Scenario s) {
  switch (s) {
    case Scenario::IdealClosed: return "beam-splitter + frame";
    case Scenario::EffectiveOpen: return "dispersive + crosstalk + pulse leakage";
    case Scenario::FullOpen: return "interaction + crosstalk + pulse leakage";
  }
  return "?";
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  const SystemParams& p = cfg.system;
  const DerivedCouplings dc = derive_couplings(p);
  const ConditionReport conditions = validate_conditions(p);

  const HilbertLayout layout = HilbertLayout::standard(p.n_pairs, cfg.cutoff, true);
  const HilbertLayout modes(false, layout.mode_cutoffs());

  WStateSpec wspec;
  wspec.n_pairs = p.n_pairs;
  wspec.alpha = p.alpha;
  const Vector target = ideal_target(wspec, modes);
  QuantumState state0 =
      QuantumState::ket(layout, kron_vec(dressed_plus(), w_state(wspec, modes)));

  TimeDependentH h(layout);
  const bool open = cfg.scenario != Scenario::IdealClosed;
  switch (cfg.scenario) {
    case Scenario::IdealClosed:
      h.add_static(build_beam_splitter_h(p, layout) + build_frame_h(p, layout));
      break;
    case Scenario::EffectiveOpen:
      h.add_static(build_dispersive_h(p, layout));
      h.append(build_crosstalk_h(p, layout));
      h.append(build_pulse_leakage_h(p, layout));
      break;
    case Scenario::FullOpen:
      h = build_interaction_h(p, layout);
      h.append(build_crosstalk_h(p, layout));
      h.append(build_pulse_leakage_h(p, layout));
      break;
  }
  h.finalize();
  const CollapseSet collapse = open ? build_collapse_set(p, layout) : CollapseSet{};

  const Observer obs(layout, target);
  RunArtifacts art;
  switch (cfg.solver.method) {
    case Method::ClosedRk4:
      art.sim = evolve_closed(h, state0, cfg.solver, &obs);
      break;
    case Method::LindbladRk4:
      art.sim = evolve_lindblad(h, collapse, state0, cfg.solver, &obs);
      break;
    case Method::Trajectories:
      art.sim = evolve_trajectories(h, collapse, state0, cfg.solver, &obs);
      break;
  }

  art.t_transfer = dc.t_transfer;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const SampleRow& r : art.sim.rows) {
    const double f = std::sqrt(std::max(r.fidelity_sq, 0.0));
    if (f > art.peak_fidelity) {
      art.peak_fidelity = f;
      art.peak_t_over_t = r.t / dc.t_transfer;
    }
    const double dist = std::abs(r.t - dc.t_transfer);
    if (dist < best_dist) {
      best_dist = dist;
      art.fidelity_at_transfer = f;
    }
  }
  art.csv_text = make_csv(art.sim.rows, dc.t_transfer, p.n_pairs);

  const TruncationReport tails = truncation_report(p.alpha, cfg.cutoff);
  json man;
  man["scenario"] = scenario_name(cfg.scenario);
  man["label"] = cfg.label;
  man["config"] = json::parse(cfg.echo);
  man["derived"] = {{"lambda_rad_s", dc.lambda},
                    {"lambda_hz", dc.lambda / kTwoPi},
                    {"lambda_mode_rad_s", dc.lambda_mode},
                    {"lambda_pair_rad_s", dc.lambda_pair},
                    {"t_transfer_s", dc.t_transfer},
                    {"phi0_rad", dc.phi0}};
  man["encoding"] = {{"alpha", p.alpha},
                     {"cutoff", cfg.cutoff},
                     {"even_tail", tails.even_tail},
                     {"odd_tail", tails.odd_tail}};
  json items = json::array();
  for (const ConditionItem& it : conditions.items)
    items.push_back({{"id", it.id},
                     {"residual", it.residual},
                     {"tolerance", it.tolerance},
                     {"pass", it.pass}});
  man["conditions"] = {{"all_pass", conditions.all_pass},
                       {"items", items},
                       {"warnings", conditions.warnings}};
  man["hamiltonian"] = {{"terms", hamiltonian_label(cfg.scenario)},
                        {"nnz", h.nnz()},
                        {"time_dependent", !h.is_static()}};
  json chans = json::array();
  for (const CollapseChannel& c : collapse.channels)
    chans.push_back({{"name", c.name}, {"rate_per_s", c.rate}});
  man["channels"] = chans;
  man["dimension"] = layout.dim();
  man["results"] = {{"peak_fidelity", art.peak_fidelity},
                    {"peak_t_over_T", art.peak_t_over_t},
                    {"fidelity_at_T", art.fidelity_at_transfer},
                    {"samples", art.sim.rows.size()}};
  man["diagnostics"] = {{"max_norm_drift", art.sim.max_norm_drift},
                        {"max_trace_drift", art.sim.max_trace_drift},
                        {"max_herm_defect", art.sim.max_herm_defect},
                        {"min_eig_estimate", art.sim.min_eig_estimate},
                        {"warnings", art.sim.warnings},
                        {"jump_counts", art.sim.jump_counts}};
  man["output"] = {{"results", cfg.results_name}};
  art.manifest_text = man.dump(2) + "\n";

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_atomic(fs::path(out_dir) / cfg.results_name, art.csv_text);
    write_atomic(fs::path(out_dir) / cfg.manifest_name, art.manifest_text);
  }
  return art;
}

SweepResult run_sweep(const ExperimentConfig& base, const std::string& axis,
                      const std::vector<double>& values, const std::string& out_dir) {
  if (values.empty()) throw ConfigError("sweep: no values given");

  // Resolve configs up front so config errors surface before any run starts.
  std::vector<ExperimentConfig> cfgs;
  cfgs.reserve(values.size());
  for (double v : values) cfgs.push_back(with_axis_value(base, axis, v));

  const int n = static_cast<int>(values.size());
  SweepResult res;
  res.axis = axis;
  res.points.resize(n);
  std::vector<std::exception_ptr> errors(n);

#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      const std::string dir =
          out_dir.empty() ? std::string()
                          : (fs::path(out_dir) / ("point" + std::to_string(i))).string();
      const RunArtifacts art = run_experiment(cfgs[i], dir);
      res.points[i] = {values[i], art.peak_fidelity, art.peak_t_over_t,
                       art.fidelity_at_transfer};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (int i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  res.csv_text = "value,peak_fidelity,peak_t_over_T,fidelity_at_T\n";
  for (const SweepPoint& pt : res.points)
    res.csv_text += fmt(pt.value) + ',' + fmt(pt.peak_fidelity) + ',' +
                    fmt(pt.peak_t_over_t) + ',' + fmt(pt.fidelity_at_transfer) + '\n';
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_atomic(fs::path(out_dir) / "sweep.csv", res.csv_text);
  }
  return res;
}

}  // namespace catw
