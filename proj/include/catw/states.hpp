#pragma once

#include <vector>

#include "catw/hilbert.hpp"

// State preparation for the encoded register. Logical qubits are Schroedinger
// cat states of fixed photon-number parity: the even cat is the logical 0, the
// odd cat the logical 1. The register state is a W state over the pairs, with
// exactly one odd cat and even cats elsewhere.

namespace catw {

enum class CatParity { Even, Odd };

struct CatParams {
  double alpha = 0.5;                   // coherent amplitude (real)
  CatParity parity = CatParity::Even;
  double theta = 0.0;                   // Fock-space rotation: c_n -> e^{i n theta} c_n
};

/// Normalized truncated cat-state coefficient vector of length `cutoff`.
/// Coefficients are alpha^n/sqrt(n!) on the parity's Fock levels, rotated by
/// theta and renormalized after truncation.
Vector cat_ket(const CatParams& p, int cutoff);

/// Mean photon number of the truncated cat (diagnostic; the untruncated
/// values are |alpha|^2 tanh(|alpha|^2) and |alpha|^2 coth(|alpha|^2)).
double cat_mean_photon(const CatParams& p, int cutoff);

/// Probability mass of the untruncated cat above Fock level cutoff-1.
struct TruncationReport {
  double even_tail = 0.0;
  double odd_tail = 0.0;
};
TruncationReport truncation_report(double alpha, int cutoff);

/// Smallest cutoff whose even-parity tail is below tol. The odd-parity tail
/// at that cutoff is larger (see truncation_report) and is surfaced in run
/// manifests rather than folded into this rule.
int default_cutoff(double alpha, double tol = 1e-6);

/// Which side of each pair carries the encoded qubit.
enum class WTarget { OddModes, EvenModes };

struct WStateSpec {
  int n_pairs = 3;
  double alpha = 0.5;
  WTarget target = WTarget::OddModes;
  /// Optional per-target-mode rotation angles (size n_pairs; default zeros).
  std::vector<double> theta;
};

/// Cavity-only encoded W state: (1/sqrt(N)) sum_k |odd cat at target mode of
/// pair k> x |even cats at the other target modes> x |vacuum elsewhere>.
/// The layout must be mode-only with 2*n_pairs modes.
Vector w_state(const WStateSpec& spec, const HilbertLayout& cavity_layout);

/// Transfer target: the same W state re-encoded on the even modes with
/// vacuum on the odd modes (phases default to zero).
Vector ideal_target(const WStateSpec& spec, const HilbertLayout& cavity_layout);

/// Qutrit component (|g> + |e>)/sqrt(2) used throughout the protocol.
Vector dressed_plus();

}  // namespace catw
