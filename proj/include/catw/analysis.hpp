#pragma once

#include <string>
#include <vector>

#include "catw/hilbert.hpp"
#include "catw/states.hpp"

// Post-processing layer: reduced states, transfer fidelity, the
// Heisenberg-picture verification of the pair swap, and phase fits for the
// transferred cats.

namespace catw {

/// Reduced density matrix over the kept subsystems (given in any order;
/// result is in canonical subsystem order). Cost scales with
/// (kept dim)^2 * (traced dim), so keep the kept factor small: tracing a
/// composite ket down to the qutrit or to one mode is cheap, the reverse is
/// not. The trace of the input (norm^2 for kets) is preserved exactly, so
/// unnormalized solver output stays unnormalized.
QuantumState partial_trace(const QuantumState& state, const std::vector<int>& keep);

/// Squared transfer fidelity <ideal| rho |ideal> (= |<ideal|psi>|^2 for
/// kets). Roundoff below zero is clamped. Layouts must match.
double fidelity_sq(const QuantumState& ideal, const QuantumState& state);

/// Square-root convention: F = sqrt(<ideal| rho |ideal>).
double fidelity(const QuantumState& ideal, const QuantumState& state);

/// One sign convention of the intra-pair hop Hamiltonian.
struct SwapCheckItem {
  std::string convention;     // "first-pair" (-lambda hop) or "later-pair" (+lambda)
  Complex coeff_keep{0.0};    // fitted coefficient of adag_odd in U adag_odd U^dag
  Complex coeff_swap{0.0};    // fitted coefficient of adag_even
  double max_deviation = 0.0; // worst entry vs the closed-form target
};

struct SwapCheckReport {
  double lambda_t = 0.0;  // dimensionless lambda * t of the check
  std::vector<SwapCheckItem> items;
  double max_deviation = 0.0;  // worst item
};

/// Conjugates the creation operator of the sending mode by the exact pair
/// propagator U = exp(-i H t) (dense matrix exponential) and compares with
/// cos(lambda t) adag_odd +/- i sin(lambda t) adag_even; the upper sign is the
/// first-pair hop convention, the lower one every later pair. Deviations are
/// measured only on columns whose pair photon total is <= cutoff - 2: the hop
/// conserves the total, so those columns never see the truncation edge.
///   pair_layout: two modes, no qutrit.
SwapCheckReport heisenberg_swap_check(double lambda, double t,
                                      const HilbertLayout& pair_layout);

/// Result of a rotation-angle fit against a truncated cat.
struct PhaseFit {
  bool transferred = false;  // fit amplitude cleared the 0.5 floor
  double theta = 0.0;        // fitted angle; meaningless when !transferred
  double overlap_sq = 0.0;   // squared overlap at the fitted angle
  double residual = 0.0;     // 1 - overlap_sq
};

/// Fits the Fock rotation angle of a single-mode state against
/// cat(reference.parity, reference.alpha, theta), maximizing the squared
/// overlap. The overlap magnitude is pi-periodic in theta for either parity,
/// so the fitted angle is reported in (-pi/2, pi/2]. States whose best
/// overlap stays below 0.5 in amplitude get transferred = false.
PhaseFit fit_cat_phase(const QuantumState& mode_state, const CatParams& reference);

/// Joint phase fit of a transferred register.
struct PhaseReport {
  bool transferred = false;
  std::vector<int> modes;      // receiving mode index per pair
  std::vector<double> theta;   // fitted angle per pair, in (-pi, pi]
  double overlap_sq = 0.0;     // squared overlap with the fitted target
  double residual = 0.0;       // 1 - overlap_sq
};

/// Fits one rotation angle per receiving mode by coordinate ascent on
/// <target(theta_1..theta_N)| rho |target(...)>, where the target is the
/// re-encoded W state of `spec` with per-mode rotations. The register state
/// must be cavity-only (trace out the qutrit first). Under matched transfer
/// conditions all fitted angles come out at zero and the residual vanishes to
/// solver accuracy; a best-fit amplitude below 0.5 is reported as a failed
/// transfer instead of a phase list.
PhaseReport extract_phases(const QuantumState& cavity_state, const WStateSpec& spec);

/// Diagonal expectation bundle. Values are raw (not renormalized); `trace`
/// carries the state's norm^2 / trace for callers that want to renormalize.
struct ObservableSet {
  std::vector<double> mode_photon;   // <n_m> per mode
  std::vector<double> pair_photon;   // <n_odd + n_even> per pair
  std::vector<double> mode_parity;   // <(-1)^n_m> per mode
  std::vector<double> qutrit_pops;   // {g, e, f}; empty for mode-only layouts
  double trace = 0.0;
};

ObservableSet observables(const QuantumState& state);

}  // namespace catw
