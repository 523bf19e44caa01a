#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "catw/hamiltonians.hpp"
#include "catw/hilbert.hpp"

// Time evolution. Three integrators share one result shape:
//   * evolve_closed      fixed-step classic Runge-Kutta on i dpsi/dt = H(t) psi,
//   * evolve_lindblad    the same stepper on the master equation, dense rho,
//   * evolve_trajectories quantum-jump unraveling averaged over an ensemble.
// States are never renormalized behind the caller's back; norm and trace
// drift are monitored and the run aborts when they exceed the configured
// tolerance, so integrator misconfiguration surfaces instead of hiding.

namespace catw {

enum class Method { ClosedRk4, LindbladRk4, Trajectories };
std::string method_name(Method m);

struct SolverConfig {
  Method method = Method::ClosedRk4;
  double dt = 0.0;  // seconds
  long n_steps = 0;
  int sample_stride = 1;  // observable sampling period in steps
  long n_trajectories = 0;
  std::uint64_t seed = 1;

  double norm_tol = 1e-6;   // closed runs: | ||psi||^2 - 1 | ceiling
  double trace_tol = 1e-5;  // density runs: | tr rho - 1 | ceiling
  // Positivity is monitored (estimate below), never enforced by clipping.
  bool estimate_min_eig = true;
  int min_eig_iters = 8;  // power-iteration steps per sample, warm-started
};

struct SampleRow {
  double t = 0.0;
  double fidelity_sq = 0.0;  // <target| rho_modes |target>
  double trace = 0.0;        // tr rho, or ||psi||^2 for kets
  std::vector<double> pair_n;
  double pop_g = 0.0, pop_e = 0.0, pop_f = 0.0;
};

/// Evaluates the standard observable set against a fixed mode-space target
/// ket: squared transfer fidelity of the reduced cavity state, trace/norm,
/// photon total of each resonator pair, qutrit level populations. The layout
/// must carry the qutrit (subsystem 0), so the reduced-state fidelity is a
/// sum of three block quadratic forms and never materializes rho_modes.
class Observer {
 public:
  Observer(HilbertLayout layout, Vector target_modes_ket);

  const HilbertLayout& layout() const { return layout_; }
  const Vector& target() const { return target_; }

  SampleRow sample(double t, const Vector& psi) const;
  SampleRow sample(double t, const Matrix& rho) const;

 private:
  HilbertLayout layout_;
  Vector target_;
  long block_ = 0;  // mode-space dimension under one qutrit level
  std::vector<Eigen::VectorXd> pair_diag_;
};

struct SimulationResult {
  std::vector<SampleRow> rows;  // empty when no observer was passed
  Vector final_psi;             // closed runs
  Matrix final_rho;             // density runs

  double max_norm_drift = 0.0;
  double max_trace_drift = 0.0;
  double max_herm_defect = 0.0;
  double min_eig_estimate = 0.0;  // most negative across sample times
  std::vector<std::string> warnings;
  std::vector<long> jump_counts;  // trajectories: per channel, whole ensemble

  long n_steps = 0;
  double dt = 0.0;
};

/// Closed-system propagation of a normalized ket. Errors out (SolverError)
/// when the norm drifts beyond cfg.norm_tol; the drift is reported in the
/// result, never corrected.
SimulationResult evolve_closed(TimeDependentH& h, const QuantumState& state0,
                               const SolverConfig& cfg, const Observer* obs = nullptr);

/// Master-equation propagation of a dense density matrix:
///   d rho/dt = -i[H(t), rho]
///              + sum_c rate_c (L_c rho L_c^dag - {L_c^dag L_c, rho}/2).
/// Dense storage is limited to dimension 4096 (ResourceError above, with the
/// trajectory solver as the suggested fallback). Trace, Hermiticity defect
/// and a minimum-eigenvalue estimate are tracked; trace drift beyond
/// cfg.trace_tol aborts, an eigenvalue estimate below -1e-6 only warns.
SimulationResult evolve_lindblad(TimeDependentH& h, const CollapseSet& collapse,
                                 const QuantumState& state0, const SolverConfig& cfg,
                                 const Observer* obs = nullptr);

/// Quantum-jump unraveling of the same master equation: deterministic drift
/// under H - (i/2) sum_c rate_c L_c^dag L_c, collapse when the squared norm
/// falls below a uniform draw, channel picked proportional to
/// rate_c ||L_c psi||^2. Ensemble averages of the sampled observables
/// converge to evolve_lindblad. Results are bit-identical for a given
/// (config, seed) regardless of thread count: every trajectory owns an RNG
/// stream derived from (seed, trajectory index) and the ensemble average is
/// reduced in trajectory order.
SimulationResult evolve_trajectories(const TimeDependentH& h, const CollapseSet& collapse,
                                     const QuantumState& state0, const SolverConfig& cfg,
                                     const Observer* obs = nullptr);

}  // namespace catw
