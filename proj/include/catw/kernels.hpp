#pragma once

#include <vector>

#include "catw/hilbert.hpp"

// Hot loops of the integrators. The functions in catw::kernels are the
// production implementations: OpenMP-parallel, cache-blocked, and written so
// that results are bit-identical for any thread count (each output element is
// produced by exactly one thread; reductions accumulate fixed-size block
// partials that are summed in index order). catw::kernels::ref holds plain
// serial textbook implementations of the same contracts; the test suite and
// the benchmark target compare the two.

namespace catw::kernels {

/// Raw view of a compressed row-major sparse matrix.
struct CsrView {
  long rows = 0;
  const int* outer = nullptr;
  const int* inner = nullptr;
  const Complex* values = nullptr;
};

/// View into an Eigen sparse matrix (must be compressed).
CsrView view(const SparseMatrix& m);

/// y = A x.
void spmv(const CsrView& a, const Complex* x, Complex* y);

/// Y = A X for dense column-major X, Y. Columns are processed in batches so
/// the sparse matrix is streamed once per batch instead of once per column.
void spmm(const CsrView& a, const Matrix& x, Matrix& y);

/// V = X A^dag. Column j of V is a combination of columns of X selected by
/// row j of A, so every inner loop runs down contiguous memory. With X
/// Hermitian this equals (A X)^dag, which is how the integrator gets the
/// commutator out of a single product.
void spmm_adjoint_right(const CsrView& a, const Matrix& x, Matrix& v);

/// R += scale * (-i) * (M - M^dag), the commutator contribution once M = H rho.
void accum_minus_i_commutator(const Matrix& m, double scale, Matrix& r);
/// Overwriting form: R = scale * (-i) * (M - M^dag).
void set_minus_i_commutator(const Matrix& m, double scale, Matrix& r);

/// Collapse operator with at most one nonzero per row (every channel in this
/// model: mode annihilation, qutrit lowering, level projectors). L rho L^dag
/// then reduces to a scaled, index-shifted copy of rho.
struct ShiftChannel {
  long dim = 0;
  std::vector<long> rows;  // active output rows i with L(i, src[i]) = val[i]
  std::vector<long> src;
  std::vector<Complex> val;
  std::vector<long> col_of_row;     // dense: source column per row, -1 if none
  std::vector<Complex> val_of_row;  // dense companion of col_of_row

  static bool eligible(const SparseMatrix& l);
  static ShiftChannel from_sparse(const SparseMatrix& l);
};

/// R += rate * L rho L^dag for a single-entry-per-row channel.
void accum_jump(const ShiftChannel& ch, double rate, const Matrix& rho, Matrix& r);

/// R -= (k_i + k_j) rho_ij with k = sum_c rate_c/2 diag(L_c^dag L_c).
void accum_diag_anticommutator(const Eigen::VectorXd& k, const Matrix& rho, Matrix& r);

/// y += a * x (matrix and vector forms).
void axpy(Complex a, const Matrix& x, Matrix& y);
void axpy(Complex a, const Vector& x, Vector& y);

/// y = x + c * k, one pass.
void add_scaled(const Matrix& x, Complex c, const Matrix& k, Matrix& y);
void add_scaled(const Vector& x, Complex c, const Vector& k, Vector& y);

/// Classic Runge-Kutta update y += (dt/6)(k1 + 2 k2 + 2 k3 + k4), one pass.
void rk4_combine(double dt, const Matrix& k1, const Matrix& k2, const Matrix& k3,
                 const Matrix& k4, Matrix& y);
void rk4_combine(double dt, const Vector& k1, const Vector& k2, const Vector& k3,
                 const Vector& k4, Vector& y);

/// Deterministic blocked reductions.
Complex dot(const Vector& a, const Vector& b);  // a^dag b
double norm2(const Vector& a);                  // ||a||^2
Complex trace(const Matrix& m);
double herm_defect(const Matrix& m);            // max |M - M^dag|
Complex quad_form(const Vector& x, const Matrix& m);       // x^dag M x
double diag_expectation(const Eigen::VectorXd& d, const Matrix& rho);
double diag_expectation(const Eigen::VectorXd& d, const Vector& psi);

namespace ref {

/// Serial reference implementations (plain formulas, no blocking, no
/// structure exploitation). Kept for testing and benchmarking only.
void spmm(const SparseMatrix& a, const Matrix& x, Matrix& y);
Matrix adjoint_right(const SparseMatrix& a, const Matrix& x);  // X A^dag
Matrix commutator(const SparseMatrix& h, const Matrix& rho);  // H rho - rho H
Matrix jump(const SparseMatrix& l, const Matrix& rho);        // L rho L^dag
Matrix anticommutator_half(const SparseMatrix& k, const Matrix& rho);  // (K rho + rho K)/2

/// Full textbook Lindblad right-hand side:
///   -i[H, rho] + sum_c rate_c (L rho L^dag - 1/2 {L^dag L, rho}).
Matrix lindblad_rhs(const SparseMatrix& h,
                    const std::vector<SparseMatrix>& ls,
                    const std::vector<double>& rates, const Matrix& rho);

}  // namespace ref

}  // namespace catw::kernels
