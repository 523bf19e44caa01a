#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "catw/errors.hpp"

namespace catw {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<Complex>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Matrix entries with |v| <= kDropTol are dropped after operator arithmetic.
inline constexpr double kDropTol = 1e-14;

// Qutrit levels. Transition frequencies satisfy omega_fg = omega_fe + omega_eg.
enum QutritLevel : int { kG = 0, kE = 1, kF = 2 };

/// Composite Hilbert space of (optionally) one qutrit followed by a row of
/// bosonic modes, each truncated to its own Fock cutoff. Subsystem 0 is the
/// qutrit when present; the modes follow in order. The flattened basis index
/// runs with subsystem 0 slowest (leftmost Kronecker factor).
class HilbertLayout {
 public:
  HilbertLayout() = default;
  HilbertLayout(bool with_qutrit, std::vector<int> mode_cutoffs);

  /// Layout with 2*n_pairs modes at a common cutoff, qutrit first.
  static HilbertLayout standard(int n_pairs, int cutoff, bool with_qutrit = true);
  /// Mode-only layout (used for pair-local checks).
  static HilbertLayout modes_only(int n_modes, int cutoff);

  bool has_qutrit() const { return with_qutrit_; }
  int n_modes() const { return static_cast<int>(cutoffs_.size()); }
  int n_pairs() const { return n_modes() / 2; }
  int mode_cutoff(int mode) const { return cutoffs_.at(mode); }
  const std::vector<int>& mode_cutoffs() const { return cutoffs_; }

  int n_subsystems() const { return static_cast<int>(dims_.size()); }
  int subsystem_dim(int s) const { return dims_.at(s); }
  /// Subsystem index of a mode (modes shift by one when a qutrit is present).
  int mode_subsystem(int mode) const { return mode + (with_qutrit_ ? 1 : 0); }

  /// Total dimension (product of subsystem dimensions).
  long dim() const { return dim_; }
  /// Stride of subsystem s in the flattened index.
  long stride(int s) const { return strides_.at(s); }

  /// Flattened index from per-subsystem occupation numbers.
  long flatten(const std::vector<int>& levels) const;
  /// Per-subsystem occupation numbers from a flattened index.
  std::vector<int> unflatten(long index) const;

  bool operator==(const HilbertLayout& o) const {
    return with_qutrit_ == o.with_qutrit_ && cutoffs_ == o.cutoffs_;
  }
  bool operator!=(const HilbertLayout& o) const { return !(*this == o); }

 private:
  bool with_qutrit_ = false;
  std::vector<int> cutoffs_;
  std::vector<int> dims_;
  std::vector<long> strides_;
  long dim_ = 1;
};

/// Sparse operator bound to a layout. Arithmetic checks layout compatibility
/// and prunes entries below kDropTol so patterns stay tight.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(HilbertLayout layout, SparseMatrix mat);

  const HilbertLayout& layout() const { return layout_; }
  const SparseMatrix& matrix() const { return mat_; }
  SparseMatrix& matrix() { return mat_; }
  long dim() const { return layout_.dim(); }
  long nnz() const { return mat_.nonZeros(); }

  SparseOperator adjoint() const;
  Matrix dense() const { return Matrix(mat_); }
  /// Hermiticity test, cached. Candidates with |A - A^dag|_max <= tol pass.
  bool is_hermitian(double tol = 1e-12) const;
  /// Largest |A - A^dag| entry.
  double hermiticity_defect() const;

  SparseOperator& prune();

  friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator*(Complex s, const SparseOperator& a);
  friend Vector operator*(const SparseOperator& a, const Vector& x);

 private:
  HilbertLayout layout_;
  SparseMatrix mat_;
  mutable std::optional<bool> hermitian_;  // cache keyed to is_hermitian's default tol
};

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);

/// Max |entry| of a sparse matrix (0 for empty).
double max_abs(const SparseMatrix& m);

/// Identity on the full layout.
SparseOperator identity(const HilbertLayout& layout);

/// Embed a single-subsystem operator into the full space (kron with
/// identities on every other subsystem).
SparseOperator embed(const HilbertLayout& layout, int subsystem, const SparseMatrix& op);

/// Truncated annihilation operator for one mode: entries sqrt(n) at
/// (n-1, n), n = 1..d-1, embedded into the full space.
SparseOperator annihilation(const HilbertLayout& layout, int mode);

/// Number operator for one mode.
SparseOperator number_op(const HilbertLayout& layout, int mode);

/// Photon-number parity (-1)^n for one mode.
SparseOperator mode_parity(const HilbertLayout& layout, int mode);

/// Qutrit transition operator |l><m| embedded into the full space.
SparseOperator qutrit_op(const HilbertLayout& layout, int l, int m);

/// Kronecker product of state vectors, first factor slowest.
Vector kron_vec(const Vector& a, const Vector& b);

/// Pure state or density matrix bound to a layout.
class QuantumState {
 public:
  enum class Kind { Ket, Density };

  /// Normalized ket. Throws ValidationError if | ||psi|| - 1 | > tol.
  static QuantumState ket(HilbertLayout layout, Vector psi, double tol = 1e-12);
  /// Density matrix; must be Hermitian with unit trace within tol.
  static QuantumState density(HilbertLayout layout, Matrix rho, double tol = 1e-12);
  /// No validation (solver internals, partial results).
  static QuantumState unchecked_ket(HilbertLayout layout, Vector psi);
  static QuantumState unchecked_density(HilbertLayout layout, Matrix rho);

  Kind kind() const { return kind_; }
  bool is_ket() const { return kind_ == Kind::Ket; }
  const HilbertLayout& layout() const { return layout_; }
  const Vector& vec() const;
  const Matrix& rho() const;

  /// Density-matrix view (forms |psi><psi| for kets).
  Matrix to_density() const;

 private:
  QuantumState() = default;
  HilbertLayout layout_;
  Kind kind_ = Kind::Ket;
  Vector vec_;
  Matrix rho_;
};

}  // namespace catw
