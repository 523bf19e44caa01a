#include <omp.h>

#include <random>

#include "catw/hilbert.hpp"
#include "catw/kernels.hpp"
#include "doctest.h"

using namespace catw;
namespace kk = catw::kernels;

namespace {

std::mt19937_64 rng(20260317);

Complex rand_c() {
  std::normal_distribution<double> nd;
  return {nd(rng), nd(rng)};
}

SparseMatrix random_sparse(long n, double density) {
  std::uniform_real_distribution<double> u;
  std::vector<Triplet> trips;
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      if (u(rng) < density) trips.emplace_back(i, j, rand_c());
  SparseMatrix m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

SparseMatrix random_hermitian_sparse(long n, double density) {
  SparseMatrix m = random_sparse(n, density);
  SparseMatrix h = m + SparseMatrix(m.adjoint());
  h.makeCompressed();
  return h;
}

Matrix random_dense(long n) {
  Matrix m(n, n);
  for (long j = 0; j < n; ++j)
    for (long i = 0; i < n; ++i) m(i, j) = rand_c();
  return m;
}

Matrix random_hermitian_dense(long n) {
  Matrix m = random_dense(n);
  return 0.5 * (m + m.adjoint().eval());
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("spmv matches Eigen") {
  const long n = 97;
  SparseMatrix a = random_sparse(n, 0.1);
  Vector x(n), y(n);
  for (long i = 0; i < n; ++i) x(i) = rand_c();
  kk::spmv(kk::view(a), x.data(), y.data());
  Vector want = a * x;
  CHECK((y - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spmm agrees with the serial reference and Eigen") {
  // Deliberately not a multiple of the column batch width.
  const long n = 53;
  SparseMatrix a = random_sparse(n, 0.12);
  Matrix x = random_dense(n);
  Matrix y = Matrix::Zero(n, n), y_ref = Matrix::Zero(n, n);
  kk::spmm(kk::view(a), x, y);
  kk::ref::spmm(a, x, y_ref);
  CHECK(max_abs_diff(y, y_ref) < 1e-12);
  CHECK(max_abs_diff(y, Matrix(a * x)) < 1e-12);
}

TEST_CASE("spmm_adjoint_right gives X A^dag") {
  const long n = 53;
  SparseMatrix a = random_sparse(n, 0.12);
  Matrix x = random_dense(n);
  Matrix v = Matrix::Zero(n, n);
  kk::spmm_adjoint_right(kk::view(a), x, v);
  CHECK(max_abs_diff(v, kk::ref::adjoint_right(a, x)) < 1e-12);
  CHECK(max_abs_diff(v, Matrix(x * a.adjoint())) < 1e-12);
}

TEST_CASE("commutator kernels against the elementwise formula") {
  const long n = 37;
  Matrix m = random_dense(n);
  Matrix want(n, n);
  const Complex mi(0.0, -1.0);
  for (long j = 0; j < n; ++j)
    for (long i = 0; i < n; ++i) want(i, j) = 0.7 * mi * (m(i, j) - std::conj(m(j, i)));

  Matrix r = random_dense(n);
  Matrix r0 = r;
  kk::set_minus_i_commutator(m, 0.7, r);
  CHECK(max_abs_diff(r, want) < 1e-13);

  r = r0;
  kk::accum_minus_i_commutator(m, 0.7, r);
  CHECK(max_abs_diff(r, r0 + want) < 1e-13);
}

TEST_CASE("commutator pipeline equals the reference commutator") {
  // The integrator computes V = H rho, then -i(V - V^dag). With H Hermitian
  // this is -i[H, rho].
  const long n = 41;
  SparseMatrix h = random_hermitian_sparse(n, 0.1);
  Matrix rho = random_hermitian_dense(n);
  Matrix v = Matrix::Zero(n, n), out = Matrix::Zero(n, n);
  kk::spmm(kk::view(h), rho, v);
  kk::set_minus_i_commutator(v, 1.0, out);
  Matrix want = Complex(0.0, -1.0) * kk::ref::commutator(h, rho);
  CHECK(max_abs_diff(out, want) < 1e-11);
}

TEST_CASE("shift channel eligibility") {
  HilbertLayout lay = HilbertLayout::modes_only(1, 6);
  SparseMatrix a = annihilation(lay, 0).matrix();
  SparseMatrix n = number_op(lay, 0).matrix();
  CHECK(kk::ShiftChannel::eligible(a));
  CHECK(kk::ShiftChannel::eligible(n));
  SparseMatrix sum = a + SparseMatrix(a.adjoint());  // two entries in middle rows
  sum.makeCompressed();
  CHECK(!kk::ShiftChannel::eligible(sum));
  CHECK_THROWS_AS(kk::ShiftChannel::from_sparse(sum), ValidationError);
}

TEST_CASE("accum_jump matches the reference jump term") {
  HilbertLayout lay(true, {4, 3});
  for (const SparseMatrix& l : {annihilation(lay, 0).matrix(), qutrit_op(lay, kG, kE).matrix(),
                                qutrit_op(lay, kE, kE).matrix()}) {
    Matrix rho = random_hermitian_dense(lay.dim());
    Matrix r = Matrix::Zero(lay.dim(), lay.dim());
    kk::accum_jump(kk::ShiftChannel::from_sparse(l), 0.37, rho, r);
    CHECK(max_abs_diff(r, Matrix(0.37 * kk::ref::jump(l, rho))) < 1e-12);
  }
}

TEST_CASE("accum_diag_anticommutator matches the elementwise formula") {
  const long n = 30;
  Eigen::VectorXd k(n);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (long i = 0; i < n; ++i) k(i) = u(rng);
  Matrix rho = random_hermitian_dense(n);
  Matrix r = random_dense(n);
  Matrix want = r;
  for (long j = 0; j < n; ++j)
    for (long i = 0; i < n; ++i) want(i, j) -= (k(i) + k(j)) * rho(i, j);
  kk::accum_diag_anticommutator(k, rho, r);
  CHECK(max_abs_diff(r, want) < 1e-13);
}

TEST_CASE("assembled right-hand side equals the textbook Lindblad formula") {
  HilbertLayout lay(true, {3, 3});
  const long n = lay.dim();
  SparseMatrix h = random_hermitian_sparse(n, 0.08);
  std::vector<SparseMatrix> ls{annihilation(lay, 0).matrix(), annihilation(lay, 1).matrix(),
                               qutrit_op(lay, kG, kE).matrix(), qutrit_op(lay, kF, kF).matrix()};
  std::vector<double> rates{0.5, 0.25, 0.125, 0.8};
  Matrix rho = random_hermitian_dense(n);

  // Production pipeline: one sparse product, the antisymmetrized commutator,
  // shifted jump accumulation, diagonal anticommutator.
  Matrix v = Matrix::Zero(n, n), out = Matrix::Zero(n, n);
  kk::spmm(kk::view(h), rho, v);
  kk::set_minus_i_commutator(v, 1.0, out);
  Eigen::VectorXd kdiag = Eigen::VectorXd::Zero(n);
  for (size_t c = 0; c < ls.size(); ++c) {
    kk::accum_jump(kk::ShiftChannel::from_sparse(ls[c]), rates[c], rho, out);
    SparseMatrix ldl = SparseMatrix(ls[c].adjoint()) * ls[c];
    for (long i = 0; i < n; ++i) kdiag(i) += 0.5 * rates[c] * ldl.coeff(i, i).real();
  }
  kk::accum_diag_anticommutator(kdiag, rho, out);

  Matrix want = kk::ref::lindblad_rhs(h, ls, rates, rho);
  CHECK(max_abs_diff(out, want) < 1e-11);
}

TEST_CASE("axpy, add_scaled, rk4_combine") {
  const long n = 19;
  Matrix x = random_dense(n), k1 = random_dense(n), k2 = random_dense(n);
  Matrix k3 = random_dense(n), k4 = random_dense(n);
  const Complex c(0.3, -1.2);

  Matrix y = x;
  kk::axpy(c, k1, y);
  CHECK(max_abs_diff(y, x + c * k1) < 1e-14);

  Matrix z(n, n);
  kk::add_scaled(x, c, k1, z);
  CHECK(max_abs_diff(z, x + c * k1) < 1e-14);

  Matrix w = x;
  kk::rk4_combine(0.01, k1, k2, k3, k4, w);
  CHECK(max_abs_diff(w, x + (0.01 / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)) < 1e-13);

  Vector vx(n), vk(n);
  for (long i = 0; i < n; ++i) {
    vx(i) = rand_c();
    vk(i) = rand_c();
  }
  Vector vy = vx;
  kk::axpy(c, vk, vy);
  CHECK((vy - (vx + c * vk)).cwiseAbs().maxCoeff() < 1e-14);
  Vector vz(n);
  kk::add_scaled(vx, c, vk, vz);
  CHECK((vz - (vx + c * vk)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("reductions match Eigen") {
  const long n = 9001;  // exercises multiple reduction blocks
  Vector a(n), b(n);
  for (long i = 0; i < n; ++i) {
    a(i) = rand_c();
    b(i) = rand_c();
  }
  CHECK(std::abs(kk::dot(a, b) - a.dot(b)) < 1e-9);  // Eigen dot conjugates the left factor
  CHECK(kk::norm2(a) == doctest::Approx(a.squaredNorm()).epsilon(1e-12));

  const long m = 61;
  Matrix rho = random_dense(m);
  CHECK(std::abs(kk::trace(rho) - rho.trace()) < 1e-12);
  CHECK(kk::herm_defect(rho) ==
        doctest::Approx((rho - rho.adjoint().eval()).cwiseAbs().maxCoeff()));
  Vector x(m);
  for (long i = 0; i < m; ++i) x(i) = rand_c();
  CHECK(std::abs(kk::quad_form(x, rho) - Complex(x.adjoint() * rho * x)) < 1e-10);

  Eigen::VectorXd d(m);
  for (long i = 0; i < m; ++i) d(i) = double(i % 7);
  double want_rho = 0.0, want_psi = 0.0;
  for (long i = 0; i < m; ++i) {
    want_rho += d(i) * rho(i, i).real();
    want_psi += d(i) * std::norm(x(i));
  }
  CHECK(kk::diag_expectation(d, rho) == doctest::Approx(want_rho).epsilon(1e-12));
  CHECK(kk::diag_expectation(d, x) == doctest::Approx(want_psi).epsilon(1e-12));
}

TEST_CASE("reductions are bit-identical across thread counts") {
  const long n = 40000;
  Vector a(n), b(n);
  for (long i = 0; i < n; ++i) {
    a(i) = rand_c();
    b(i) = rand_c();
  }
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Complex d1 = kk::dot(a, b);
  const double n1 = kk::norm2(a);
  omp_set_num_threads(4);
  const Complex d4 = kk::dot(a, b);
  const double n4 = kk::norm2(a);
  omp_set_num_threads(saved);
  CHECK(d1.real() == d4.real());
  CHECK(d1.imag() == d4.imag());
  CHECK(n1 == n4);
}
