#include "catw/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace catw::kernels {

namespace {

inline bool can_parallelize() {
#ifdef _OPENMP
  return !omp_in_parallel();
#else
  return false;
#endif
}

constexpr long kColBatch = 8;     // dense columns sharing one sparse stream
constexpr long kTile = 96;        // tile edge for transpose-access passes
constexpr long kRedBlock = 4096;  // reduction block size (fixed for determinism)

}  // namespace

CsrView view(const SparseMatrix& m) {
  CsrView v;
  v.rows = m.rows();
  v.outer = m.outerIndexPtr();
  v.inner = m.innerIndexPtr();
  v.values = m.valuePtr();
  return v;
}

void spmv(const CsrView& a, const Complex* x, Complex* y) {
  const bool par = can_parallelize();
#pragma omp parallel for schedule(static) if (par)
  for (long r = 0; r < a.rows; ++r) {
    Complex acc = 0.0;
    for (int k = a.outer[r]; k < a.outer[r + 1]; ++k) acc += a.values[k] * x[a.inner[k]];
    y[r] = acc;
  }
}

void spmm(const CsrView& a, const Matrix& x, Matrix& y) {
  const long cols = x.cols();
  const long nbatch = (cols + kColBatch - 1) / kColBatch;
  const bool par = can_parallelize();
#pragma omp parallel for schedule(static) if (par)
  for (long b = 0; b < nbatch; ++b) {
    const long j0 = b * kColBatch;
    const long jn = std::min(j0 + kColBatch, cols);
    const Complex* xc[kColBatch];
    Complex* yc[kColBatch];
    const long w = jn - j0;
    for (long j = 0; j < w; ++j) {
      xc[j] = x.col(j0 + j).data();
      yc[j] = y.col(j0 + j).data();
    }
    for (long r = 0; r < a.rows; ++r) {
      Complex acc[kColBatch] = {};
      for (int k = a.outer[r]; k < a.outer[r + 1]; ++k) {
        const Complex v = a.values[k];
        const int c = a.inner[k];
        for (long j = 0; j < w; ++j) acc[j] += v * xc[j][c];
      }
      for (long j = 0; j < w; ++j) yc[j][r] = acc[j];
    }
  }
}

void spmm_adjoint_right(const CsrView& a, const Matrix& x, Matrix& v) {
  const long n = x.rows();
  const bool par = can_parallelize();
#pragma omp parallel for schedule(static) if (par)
  for (long j = 0; j < a.rows; ++j) {
    Complex* out = v.col(j).data();
    std::fill(out, out + n, Complex(0.0));
    for (int k = a.outer[j]; k < a.outer[j + 1]; ++k) {
      const Complex w = std::conj(a.values[k]);
      const Complex* src = x.col(a.inner[k]).data();
      for (long i = 0; i < n; ++i) out[i] += w * src[i];
    }
  }
}

namespace {

template <bool Accumulate>
void minus_i_commutator_impl(const Matrix& m, double scale, Matrix& r) {
  const long n = m.rows();
  const long ntile = (n + kTile - 1) / kTile;
  const bool par = can_parallelize();
  // scale * (-i) * (M(i,j) - conj(M(j,i))); tiles keep the transposed reads
  // cache-resident.
#pragma omp parallel for schedule(static) if (par)
  for (long tj = 0; tj < ntile; ++tj) {
    const long j0 = tj * kTile, j1 = std::min(j0 + kTile, n);
    for (long ti = 0; ti < ntile; ++ti) {
      const long i0 = ti * kTile, i1 = std::min(i0 + kTile, n);
      for (long j = j0; j < j1; ++j) {
        Complex* rc = r.col(j).data();
        const Complex* mc = m.col(j).data();
        for (long i = i0; i < i1; ++i) {
          const Complex d = mc[i] - std::conj(m(j, i));
          if constexpr (Accumulate)
            rc[i] += scale * Complex(d.imag(), -d.real());  // * (-i)
          else
            rc[i] = scale * Complex(d.imag(), -d.real());
        }
      }
    }
  }
}

}  // namespace

void accum_minus_i_commutator(const Matrix& m, double scale, Matrix& r) {
  minus_i_commutator_impl<true>(m, scale, r);
}

void set_minus_i_commutator(const Matrix& m, double scale, Matrix& r) {
  minus_i_commutator_impl<false>(m, scale, r);
}

bool ShiftChannel::eligible(const SparseMatrix& l) {
  for (long r = 0; r < l.rows(); ++r)
    if (l.outerIndexPtr()[r + 1] - l.outerIndexPtr()[r] > 1) return false;
  return true;
}

ShiftChannel ShiftChannel::from_sparse(const SparseMatrix& l) {
  if (!eligible(l)) throw ValidationError("collapse operator has more than one entry per row");
  ShiftChannel ch;
  ch.dim = l.rows();
  ch.col_of_row.assign(ch.dim, -1);
  ch.val_of_row.assign(ch.dim, Complex(0.0));
  for (long r = 0; r < l.rows(); ++r) {
    for (SparseMatrix::InnerIterator it(l, r); it; ++it) {
      ch.rows.push_back(r);
      ch.src.push_back(it.col());
      ch.val.push_back(it.value());
      ch.col_of_row[r] = it.col();
      ch.val_of_row[r] = it.value();
    }
  }
  return ch;
}

void accum_jump(const ShiftChannel& ch, double rate, const Matrix& rho, Matrix& r) {
  const long n = ch.dim;
  const long nact = static_cast<long>(ch.rows.size());
  const bool par = can_parallelize();
#pragma omp parallel for schedule(static) if (par)
  for (long j = 0; j < n; ++j) {
    const long cj = ch.col_of_row[j];
    if (cj < 0) continue;
    const Complex w = rate * std::conj(ch.val_of_row[j]);
    const Complex* src = rho.col(cj).data();
    Complex* out = r.col(j).data();
    for (long k = 0; k < nact; ++k) out[ch.rows[k]] += w * ch.val[k] * src[ch.src[k]];
  }
}

void accum_diag_anticommutator(const Eigen::VectorXd& k, const Matrix& rho, Matrix& r) {
  const long n = rho.rows();
  const bool par = can_parallelize();
#pragma omp parallel for schedule(static) if (par)
  for (long j = 0; j < n; ++j) {
    const double kj = k[j];
    const Complex* rc = rho.col(j).data();
    Complex* out = r.col(j).data();
    for (long i = 0; i < n; ++i) out[i] -= (k[i] + kj) * rc[i];
  }
}

void axpy(Complex a, const Matrix& x, Matrix& y) {
  const long n = x.size();
  const Complex* xp = x.data();
  Complex* yp = y.data();
  const bool par = can_parallelize();
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < n; ++i) yp[i] += a * xp[i];
}

void axpy(Complex a, const Vector& x, Vector& y) {
  const long n = x.size();
  for (long i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_scaled(const Matrix& x, Complex c, const Matrix& k, Matrix& y) {
  const long n = x.size();
  const Complex* xp = x.data();
  const Complex* kp = k.data();
  Complex* yp = y.data();
  const bool par = can_parallelize();
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < n; ++i) yp[i] = xp[i] + c * kp[i];
}

void add_scaled(const Vector& x, Complex c, const Vector& k, Vector& y) {
  const long n = x.size();
  for (long i = 0; i < n; ++i) y[i] = x[i] + c * k[i];
}

void rk4_combine(double dt, const Matrix& k1, const Matrix& k2, const Matrix& k3,
                 const Matrix& k4, Matrix& y) {
  const long n = y.size();
  const double w = dt / 6.0;
  const Complex *p1 = k1.data(), *p2 = k2.data(), *p3 = k3.data(), *p4 = k4.data();
  Complex* yp = y.data();
  const bool par = can_parallelize();
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < n; ++i) yp[i] += w * (p1[i] + 2.0 * p2[i] + 2.0 * p3[i] + p4[i]);
}

void rk4_combine(double dt, const Vector& k1, const Vector& k2, const Vector& k3,
                 const Vector& k4, Vector& y) {
  const long n = y.size();
  const double w = dt / 6.0;
  for (long i = 0; i < n; ++i) y[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

namespace {

// Deterministic reduction: fixed-size block partials summed in index order,
// independent of thread count.
template <typename F>
Complex blocked_sum(long n, F&& partial_of_block) {
  const long nb = (n + kRedBlock - 1) / kRedBlock;
  std::vector<Complex> partials(nb);
  const bool par = can_parallelize();
#pragma omp parallel for schedule(static) if (par)
  for (long b = 0; b < nb; ++b)
    partials[b] = partial_of_block(b * kRedBlock, std::min((b + 1) * kRedBlock, n));
  Complex total = 0.0;
  for (long b = 0; b < nb; ++b) total += partials[b];
  return total;
}

}  // namespace

Complex dot(const Vector& a, const Vector& b) {
  const Complex* ap = a.data();
  const Complex* bp = b.data();
  return blocked_sum(a.size(), [&](long i0, long i1) {
    Complex s = 0.0;
    for (long i = i0; i < i1; ++i) s += std::conj(ap[i]) * bp[i];
    return s;
  });
}

double norm2(const Vector& a) {
  const Complex* ap = a.data();
  return blocked_sum(a.size(), [&](long i0, long i1) {
           Complex s = 0.0;
           for (long i = i0; i < i1; ++i) s += std::norm(ap[i]);
           return s;
         })
      .real();
}

Complex trace(const Matrix& m) {
  Complex t = 0.0;
  for (long i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

double herm_defect(const Matrix& m) {
  const long n = m.rows();
  double mx = 0.0;
  for (long j = 0; j < n; ++j)
    for (long i = 0; i <= j; ++i) mx = std::max(mx, std::abs(m(i, j) - std::conj(m(j, i))));
  return mx;
}

Complex quad_form(const Vector& x, const Matrix& m) {
  const long n = m.cols();
  const Complex* xp = x.data();
  return blocked_sum(n, [&](long j0, long j1) {
    Complex s = 0.0;
    for (long j = j0; j < j1; ++j) {
      const Complex* mc = m.col(j).data();
      Complex col = 0.0;
      for (long i = 0; i < n; ++i) col += std::conj(xp[i]) * mc[i];
      s += col * xp[j];
    }
    return s;
  });
}

double diag_expectation(const Eigen::VectorXd& d, const Matrix& rho) {
  Complex s = 0.0;
  for (long i = 0; i < rho.rows(); ++i) s += d[i] * rho(i, i);
  return s.real();
}

double diag_expectation(const Eigen::VectorXd& d, const Vector& psi) {
  double s = 0.0;
  for (long i = 0; i < psi.size(); ++i) s += d[i] * std::norm(psi[i]);
  return s;
}

namespace ref {

void spmm(const SparseMatrix& a, const Matrix& x, Matrix& y) { y = a * x; }

Matrix adjoint_right(const SparseMatrix& a, const Matrix& x) {
  const SparseMatrix ad = SparseMatrix(a.adjoint());
  return Matrix(x * ad);
}

Matrix commutator(const SparseMatrix& h, const Matrix& rho) { return h * rho - rho * h; }

Matrix jump(const SparseMatrix& l, const Matrix& rho) {
  const SparseMatrix ld = SparseMatrix(l.adjoint());
  return Matrix(l * rho * ld);
}

Matrix anticommutator_half(const SparseMatrix& k, const Matrix& rho) {
  return 0.5 * (k * rho + rho * k);
}

Matrix lindblad_rhs(const SparseMatrix& h, const std::vector<SparseMatrix>& ls,
                    const std::vector<double>& rates, const Matrix& rho) {
  Matrix out = Complex(0, -1) * commutator(h, rho);
  for (size_t c = 0; c < ls.size(); ++c) {
    SparseMatrix ldl = SparseMatrix(ls[c].adjoint()) * ls[c];
    out += rates[c] * (jump(ls[c], rho) - anticommutator_half(ldl, rho));
  }
  return out;
}

}  // namespace ref

}  // namespace catw::kernels
