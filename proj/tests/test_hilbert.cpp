#include <cmath>

#include "catw/hilbert.hpp"
#include "doctest.h"

using namespace catw;

namespace {

// Dense Kronecker product, first factor slowest. Independent oracle for the
// sparse embedding rules.
Matrix kron_dense(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix dense_annihilation(int d) {
  Matrix a = Matrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

}  // namespace

TEST_CASE("layout dimensions, strides, subsystem order") {
  HilbertLayout lay(true, {4, 3});
  CHECK(lay.has_qutrit());
  CHECK(lay.n_modes() == 2);
  CHECK(lay.n_subsystems() == 3);
  CHECK(lay.dim() == 3 * 4 * 3);
  CHECK(lay.stride(0) == 12);  // qutrit is the slowest factor
  CHECK(lay.stride(1) == 3);
  CHECK(lay.stride(2) == 1);
  CHECK(lay.mode_subsystem(0) == 1);
  CHECK(lay.mode_subsystem(1) == 2);

  HilbertLayout modes = HilbertLayout::modes_only(3, 5);
  CHECK(!modes.has_qutrit());
  CHECK(modes.dim() == 125);
  CHECK(modes.mode_subsystem(2) == 2);

  HilbertLayout std3 = HilbertLayout::standard(3, 5);
  CHECK(std3.n_pairs() == 3);
  CHECK(std3.dim() == 3L * 5 * 5 * 5 * 5 * 5 * 5);

  CHECK_THROWS_AS(HilbertLayout(false, {}), LayoutError);
  CHECK_THROWS_AS(HilbertLayout(false, {3, 0}), LayoutError);
  CHECK_THROWS_AS(HilbertLayout::standard(0, 3), LayoutError);
}

TEST_CASE("flatten and unflatten invert each other") {
  HilbertLayout lay(true, {4, 3, 2});
  for (long idx = 0; idx < lay.dim(); ++idx) {
    auto levels = lay.unflatten(idx);
    REQUIRE(levels.size() == 4);
    CHECK(lay.flatten(levels) == idx);
  }
  CHECK(lay.flatten({1, 2, 0, 1}) == 1 * 24 + 2 * 6 + 0 * 2 + 1);
  CHECK_THROWS_AS(lay.flatten({3, 0, 0, 0}), LayoutError);  // qutrit level 3
  CHECK_THROWS_AS(lay.flatten({0, 4, 0, 0}), LayoutError);  // over the cutoff
  CHECK_THROWS_AS(lay.flatten({0, 0, 0}), LayoutError);     // wrong rank
  CHECK_THROWS_AS(lay.unflatten(-1), LayoutError);
  CHECK_THROWS_AS(lay.unflatten(lay.dim()), LayoutError);
}

TEST_CASE("annihilation operator matches the dense oracle") {
  HilbertLayout lay(true, {3, 4});
  const Matrix i3 = Matrix::Identity(3, 3);
  const Matrix a0 = dense_annihilation(3);
  const Matrix a1 = dense_annihilation(4);

  Matrix want0 = kron_dense(kron_dense(i3, a0), Matrix::Identity(4, 4));
  Matrix want1 = kron_dense(kron_dense(i3, Matrix::Identity(3, 3)), a1);
  CHECK((annihilation(lay, 0).dense() - want0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((annihilation(lay, 1).dense() - want1).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(annihilation(lay, 2), LayoutError);
}

TEST_CASE("number operator, parity, and the truncated commutator") {
  const int d = 5;
  HilbertLayout lay = HilbertLayout::modes_only(1, d);
  SparseOperator a = annihilation(lay, 0);
  SparseOperator n = number_op(lay, 0);

  // n = a^dag a holds exactly even in the truncated space.
  CHECK(max_abs((n - a.adjoint() * a).matrix()) == 0.0);

  // [a, a^dag] = 1 - d |d-1><d-1|: the identity picks up a truncation defect
  // in the top level only.
  Matrix comm = commutator(a, a.adjoint()).dense();
  Matrix want = Matrix::Identity(d, d);
  want(d - 1, d - 1) = 1.0 - d;
  CHECK((comm - want).cwiseAbs().maxCoeff() < 1e-14);

  // [n, a] = -a is free of truncation artifacts.
  CHECK(max_abs((commutator(n, a) - Complex(-1.0) * a).matrix()) < 1e-14);

  Matrix par = mode_parity(lay, 0).dense();
  for (int k = 0; k < d; ++k) CHECK(par(k, k) == (k % 2 == 0 ? 1.0 : -1.0));
}

TEST_CASE("qutrit operator embedding") {
  HilbertLayout lay(true, {2, 2});
  SparseOperator sig = qutrit_op(lay, kF, kG);  // |f><g|
  Matrix m = sig.dense();
  CHECK(m.cwiseAbs().sum() == doctest::Approx(4.0));  // one entry per mode basis state
  for (int n0 = 0; n0 < 2; ++n0)
    for (int n1 = 0; n1 < 2; ++n1) {
      long row = lay.flatten({kF, n0, n1});
      long col = lay.flatten({kG, n0, n1});
      CHECK(m(row, col) == Complex(1.0));
    }
  CHECK_THROWS_AS(qutrit_op(HilbertLayout::modes_only(2, 2), kE, kG), LayoutError);
}

TEST_CASE("operator arithmetic checks layouts and prunes") {
  HilbertLayout a_lay = HilbertLayout::modes_only(1, 4);
  HilbertLayout b_lay = HilbertLayout::modes_only(1, 5);
  SparseOperator a = annihilation(a_lay, 0);
  SparseOperator b = annihilation(b_lay, 0);
  CHECK_THROWS_AS(a + b, LayoutError);
  CHECK_THROWS_AS(a * b, LayoutError);

  // a - a prunes to an empty pattern rather than stored zeros.
  CHECK((a - a).nnz() == 0);

  SparseOperator n = number_op(a_lay, 0);
  CHECK(n.is_hermitian());
  CHECK(!a.is_hermitian());
  CHECK(a.hermiticity_defect() == doctest::Approx(std::sqrt(3.0)));

  Vector x = Vector::Zero(4);
  x(2) = 1.0;
  Vector y = a * x;
  CHECK(std::abs(y(1) - std::sqrt(2.0)) < 1e-15);
  CHECK_THROWS_AS(a * Vector::Zero(5), LayoutError);
}

TEST_CASE("kron_vec composes with the layout flattening") {
  Vector u(2), v(3);
  u << Complex(0.6, 0.0), Complex(0.0, 0.8);
  v << 1.0, 2.0, Complex(0.0, 3.0);
  Vector w = kron_vec(u, v);
  REQUIRE(w.size() == 6);
  HilbertLayout lay(false, {2, 3});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(w(lay.flatten({i, j})) == u(i) * v(j));
}

TEST_CASE("quantum state validation") {
  HilbertLayout lay = HilbertLayout::modes_only(1, 3);
  Vector good = Vector::Zero(3);
  good(1) = 1.0;
  QuantumState ket = QuantumState::ket(lay, good);
  CHECK(ket.is_ket());
  CHECK(ket.vec()(1) == Complex(1.0));

  Vector bad = 1.5 * good;
  CHECK_THROWS_AS(QuantumState::ket(lay, bad), ValidationError);
  CHECK_THROWS_AS(QuantumState::ket(lay, Vector::Zero(4)), LayoutError);

  Matrix rho = ket.to_density();
  CHECK(rho(1, 1) == Complex(1.0));
  CHECK(rho.cwiseAbs().sum() == doctest::Approx(1.0));
  QuantumState dens = QuantumState::density(lay, rho);
  CHECK(!dens.is_ket());

  Matrix nonherm = rho;
  nonherm(0, 1) = 0.5;
  CHECK_THROWS_AS(QuantumState::density(lay, nonherm), ValidationError);
  Matrix off_trace = 2.0 * rho;
  CHECK_THROWS_AS(QuantumState::density(lay, off_trace), ValidationError);
  // unchecked_* admits both, by design.
  CHECK(QuantumState::unchecked_density(lay, off_trace).rho()(1, 1) == Complex(2.0));
}

TEST_CASE("embed against the dense Kronecker oracle") {
  HilbertLayout lay(true, {2, 3});
  SparseMatrix op(3, 3);
  std::vector<Triplet> t{{0, 1, Complex(0.0, 1.0)}, {2, 2, Complex(-0.5, 0.25)}};
  op.setFromTriplets(t.begin(), t.end());

  Matrix qut = Matrix(op);
  Matrix want = kron_dense(kron_dense(qut, Matrix::Identity(2, 2)), Matrix::Identity(3, 3));
  CHECK((embed(lay, 0, op).dense() - want).cwiseAbs().maxCoeff() == 0.0);

  Matrix want2 = kron_dense(kron_dense(Matrix::Identity(3, 3), Matrix::Identity(2, 2)), qut);
  CHECK((embed(lay, 2, op).dense() - want2).cwiseAbs().maxCoeff() == 0.0);

  SparseMatrix wrong(2, 2);
  CHECK_THROWS_AS(embed(lay, 2, wrong), LayoutError);
}
