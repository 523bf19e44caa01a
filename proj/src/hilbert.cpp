#include "catw/hilbert.hpp"

#include <cmath>
#include <numeric>

namespace catw {

HilbertLayout::HilbertLayout(bool with_qutrit, std::vector<int> mode_cutoffs)
    : with_qutrit_(with_qutrit), cutoffs_(std::move(mode_cutoffs)) {
  if (with_qutrit_) dims_.push_back(3);
  for (int d : cutoffs_) {
    if (d < 1) throw LayoutError("mode cutoff must be >= 1");
    dims_.push_back(d);
  }
  if (dims_.empty()) throw LayoutError("layout needs at least one subsystem");
  strides_.assign(dims_.size(), 1);
  for (int s = static_cast<int>(dims_.size()) - 2; s >= 0; --s)
    strides_[s] = strides_[s + 1] * dims_[s + 1];
  dim_ = strides_[0] * dims_[0];
}

HilbertLayout HilbertLayout::standard(int n_pairs, int cutoff, bool with_qutrit) {
  if (n_pairs < 1) throw LayoutError("need at least one resonator pair");
  return HilbertLayout(with_qutrit, std::vector<int>(2 * n_pairs, cutoff));
}

HilbertLayout HilbertLayout::modes_only(int n_modes, int cutoff) {
  return HilbertLayout(false, std::vector<int>(n_modes, cutoff));
}

long HilbertLayout::flatten(const std::vector<int>& levels) const {
  if (levels.size() != dims_.size())
    throw LayoutError("flatten: wrong number of subsystem levels");
  long idx = 0;
  for (size_t s = 0; s < dims_.size(); ++s) {
    if (levels[s] < 0 || levels[s] >= dims_[s])
      throw LayoutError("flatten: level out of range");
    idx += levels[s] * strides_[s];
  }
  return idx;
}

std::vector<int> HilbertLayout::unflatten(long index) const {
  if (index < 0 || index >= dim_) throw LayoutError("unflatten: index out of range");
  std::vector<int> levels(dims_.size());
  for (size_t s = 0; s < dims_.size(); ++s) {
    levels[s] = static_cast<int>(index / strides_[s]);
    index %= strides_[s];
  }
  return levels;
}

SparseOperator::SparseOperator(HilbertLayout layout, SparseMatrix mat)
    : layout_(std::move(layout)), mat_(std::move(mat)) {
  if (mat_.rows() != layout_.dim() || mat_.cols() != layout_.dim())
    throw LayoutError("operator matrix does not match layout dimension");
  if (!mat_.isCompressed()) mat_.makeCompressed();
}

SparseOperator SparseOperator::adjoint() const {
  return SparseOperator(layout_, SparseMatrix(mat_.adjoint()));
}

double SparseOperator::hermiticity_defect() const {
  SparseMatrix diff = mat_ - SparseMatrix(mat_.adjoint());
  return max_abs(diff);
}

bool SparseOperator::is_hermitian(double tol) const {
  if (tol == 1e-12 && hermitian_) return *hermitian_;
  bool h = hermiticity_defect() <= tol;
  if (tol == 1e-12) hermitian_ = h;
  return h;
}

SparseOperator& SparseOperator::prune() {
  mat_.prune([](const SparseMatrix::StorageIndex&, const SparseMatrix::StorageIndex&,
                const Complex& v) { return std::abs(v) > kDropTol; });
  mat_.makeCompressed();
  hermitian_.reset();
  return *this;
}

namespace {
void require_same_layout(const SparseOperator& a, const SparseOperator& b) {
  if (a.layout() != b.layout())
    throw LayoutError("operators live on different Hilbert layouts");
}
}  // namespace

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  require_same_layout(a, b);
  SparseOperator r(a.layout(), SparseMatrix(a.mat_ + b.mat_));
  return r.prune();
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
  require_same_layout(a, b);
  SparseOperator r(a.layout(), SparseMatrix(a.mat_ - b.mat_));
  return r.prune();
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  require_same_layout(a, b);
  SparseOperator r(a.layout(), SparseMatrix(a.mat_ * b.mat_));
  return r.prune();
}

SparseOperator operator*(Complex s, const SparseOperator& a) {
  SparseOperator r(a.layout(), SparseMatrix(s * a.mat_));
  return r.prune();
}

Vector operator*(const SparseOperator& a, const Vector& x) {
  if (x.size() != a.dim()) throw LayoutError("vector does not match operator layout");
  return a.mat_ * x;
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) {
  return a * b - b * a;
}

double max_abs(const SparseMatrix& m) {
  double mx = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      mx = std::max(mx, std::abs(it.value()));
  return mx;
}

SparseOperator identity(const HilbertLayout& layout) {
  SparseMatrix m(layout.dim(), layout.dim());
  m.setIdentity();
  return SparseOperator(layout, std::move(m));
}

SparseOperator embed(const HilbertLayout& layout, int subsystem, const SparseMatrix& op) {
  if (subsystem < 0 || subsystem >= layout.n_subsystems())
    throw LayoutError("embed: no such subsystem");
  const int d = layout.subsystem_dim(subsystem);
  if (op.rows() != d || op.cols() != d)
    throw LayoutError("embed: operator does not match subsystem dimension");
  const long inner = layout.stride(subsystem);       // product of dims right of s
  const long outer = layout.dim() / (inner * d);     // product of dims left of s
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(op.nonZeros()) * outer * inner);
  for (int k = 0; k < op.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(op, k); it; ++it) {
      for (long o = 0; o < outer; ++o) {
        const long row_base = (o * d + it.row()) * inner;
        const long col_base = (o * d + it.col()) * inner;
        for (long i = 0; i < inner; ++i)
          trips.emplace_back(row_base + i, col_base + i, it.value());
      }
    }
  }
  SparseMatrix m(layout.dim(), layout.dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(layout, std::move(m));
}

SparseOperator annihilation(const HilbertLayout& layout, int mode) {
  if (mode < 0 || mode >= layout.n_modes()) throw LayoutError("annihilation: no such mode");
  const int d = layout.mode_cutoff(mode);
  SparseMatrix a(d, d);
  std::vector<Triplet> trips;
  for (int n = 1; n < d; ++n) trips.emplace_back(n - 1, n, std::sqrt(double(n)));
  a.setFromTriplets(trips.begin(), trips.end());
  return embed(layout, layout.mode_subsystem(mode), a);
}

SparseOperator number_op(const HilbertLayout& layout, int mode) {
  if (mode < 0 || mode >= layout.n_modes()) throw LayoutError("number_op: no such mode");
  const int d = layout.mode_cutoff(mode);
  SparseMatrix n(d, d);
  std::vector<Triplet> trips;
  for (int k = 1; k < d; ++k) trips.emplace_back(k, k, double(k));
  n.setFromTriplets(trips.begin(), trips.end());
  return embed(layout, layout.mode_subsystem(mode), n);
}

SparseOperator mode_parity(const HilbertLayout& layout, int mode) {
  if (mode < 0 || mode >= layout.n_modes()) throw LayoutError("mode_parity: no such mode");
  const int d = layout.mode_cutoff(mode);
  SparseMatrix p(d, d);
  std::vector<Triplet> trips;
  for (int k = 0; k < d; ++k) trips.emplace_back(k, k, (k % 2 == 0) ? 1.0 : -1.0);
  p.setFromTriplets(trips.begin(), trips.end());
  return embed(layout, layout.mode_subsystem(mode), p);
}

SparseOperator qutrit_op(const HilbertLayout& layout, int l, int m) {
  if (!layout.has_qutrit()) throw LayoutError("qutrit_op: layout has no qutrit");
  if (l < 0 || l > 2 || m < 0 || m > 2) throw LayoutError("qutrit_op: level out of range");
  SparseMatrix op(3, 3);
  op.insert(l, m) = 1.0;
  op.makeCompressed();
  return embed(layout, 0, op);
}

Vector kron_vec(const Vector& a, const Vector& b) {
  Vector r(a.size() * b.size());
  for (long i = 0; i < a.size(); ++i) r.segment(i * b.size(), b.size()) = a(i) * b;
  return r;
}

QuantumState QuantumState::ket(HilbertLayout layout, Vector psi, double tol) {
  if (psi.size() != layout.dim()) throw LayoutError("ket does not match layout dimension");
  if (std::abs(psi.norm() - 1.0) > tol)
    throw ValidationError("ket is not normalized within tolerance");
  return unchecked_ket(std::move(layout), std::move(psi));
}

QuantumState QuantumState::density(HilbertLayout layout, Matrix rho, double tol) {
  if (rho.rows() != layout.dim() || rho.cols() != layout.dim())
    throw LayoutError("density matrix does not match layout dimension");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw ValidationError("density matrix is not Hermitian within tolerance");
  if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol)
    throw ValidationError("density matrix trace differs from 1 beyond tolerance");
  return unchecked_density(std::move(layout), std::move(rho));
}

QuantumState QuantumState::unchecked_ket(HilbertLayout layout, Vector psi) {
  QuantumState s;
  s.layout_ = std::move(layout);
  s.kind_ = Kind::Ket;
  s.vec_ = std::move(psi);
  return s;
}

QuantumState QuantumState::unchecked_density(HilbertLayout layout, Matrix rho) {
  QuantumState s;
  s.layout_ = std::move(layout);
  s.kind_ = Kind::Density;
  s.rho_ = std::move(rho);
  return s;
}

const Vector& QuantumState::vec() const {
  if (kind_ != Kind::Ket) throw ValidationError("state is not a ket");
  return vec_;
}

const Matrix& QuantumState::rho() const {
  if (kind_ != Kind::Density) throw ValidationError("state is not a density matrix");
  return rho_;
}

Matrix QuantumState::to_density() const {
  if (kind_ == Kind::Density) return rho_;
  return vec_ * vec_.adjoint();
}

}  // namespace catw
