#include <cmath>
#include <complex>

#include "catw/hamiltonians.hpp"
#include "catw/states.hpp"
#include "doctest.h"

using namespace catw;

namespace {
const double kLam = kTwoPi * 25e6;  // g^2/(2 delta) at the reference point
}

TEST_CASE("reference operating point and derived couplings") {
  SystemParams p = SystemParams::defaults(3);
  CHECK(p.g.size() == 6);
  CHECK(p.g[0] == kTwoPi * 150e6);
  CHECK(p.delta_pair[0] == kTwoPi * 450e6);
  CHECK(p.delta_pair[1] == -kTwoPi * 450e6);
  CHECK(p.delta_pair[2] == -kTwoPi * 450e6);
  CHECK(p.omega_fg() == doctest::Approx(kTwoPi * 12.5e9));
  CHECK(p.kappa[0] == doctest::Approx(5e4));
  CHECK(p.gamma_eg == doctest::Approx(1.0 / 30e-6));
  CHECK(p.gamma_phi_f == doctest::Approx(1.0 / 25e-6));

  // All sending modes share one frequency, all receiving modes the other:
  // the first pair sits below its transitions, later pairs above.
  CHECK(p.mode_freq[0] == doctest::Approx(kTwoPi * 12.05e9));
  CHECK(p.mode_freq[1] == doctest::Approx(kTwoPi * 4.55e9));
  CHECK(p.mode_freq[2] == doctest::Approx(kTwoPi * 12.05e9));
  CHECK(p.mode_freq[5] == doctest::Approx(kTwoPi * 4.55e9));

  DerivedCouplings d = derive_couplings(p);
  CHECK(d.lambda == doctest::Approx(kLam).epsilon(1e-12));
  CHECK(d.lambda_mode[0] == doctest::Approx(kLam).epsilon(1e-12));
  CHECK(d.lambda_mode[2] == doctest::Approx(-kLam).epsilon(1e-12));
  CHECK(d.lambda_pair[0] == doctest::Approx(kLam).epsilon(1e-12));
  CHECK(d.lambda_pair[1] == doctest::Approx(-kLam).epsilon(1e-12));
  CHECK(d.t_transfer == doctest::Approx(1e-8).epsilon(1e-12));  // 10 ns
  CHECK(d.phi0 == doctest::Approx(5.0 * M_PI).epsilon(1e-12));

  CHECK(p.g_cross == doctest::Approx(0.02 * kLam).epsilon(1e-12));
  CHECK(p.delta_leak == doctest::Approx(-kTwoPi * 2.5e9));

  SystemParams bad = p;
  bad.delta_pair.pop_back();
  CHECK_THROWS_AS(match_mode_frequencies(bad), ValidationError);
  bad = p;
  bad.kappa[3] = -1.0;
  CHECK_THROWS_AS(derive_couplings(bad), ValidationError);
  bad = p;
  bad.delta_pair[1] = 0.0;
  CHECK_THROWS_AS(derive_couplings(bad), ValidationError);
}

TEST_CASE("matching conditions at and off the reference point") {
  SystemParams p = SystemParams::defaults(3);
  ConditionReport rep = validate_conditions(p);
  CHECK(rep.all_pass);
  CHECK(rep.failures().empty());
  // g/delta = 1/3 deliberately violates the dispersive margin; at
  // omega_drive = 10 lambda the strong-driving margin is met exactly.
  REQUIRE(rep.warnings.size() == 3);
  CHECK(rep.warnings[0].find("dispersive margin") != std::string::npos);

  SystemParams skew = p;
  skew.g[1] *= 1.01;
  ConditionReport bad = validate_conditions(skew);
  CHECK(!bad.all_pass);
  CHECK(bad.failures().find("pair-lambda-symmetry[0]") != std::string::npos);
  CHECK(bad.failures().find("raman-rate-matching[1]") != std::string::npos);

  SystemParams detuned = p;
  detuned.mode_freq[2] += 1e6;
  ConditionReport bad2 = validate_conditions(detuned);
  CHECK(bad2.failures().find("frequency-matching[1a]") != std::string::npos);
}

TEST_CASE("interaction Hamiltonian matrix elements") {
  SystemParams p = SystemParams::defaults(1);
  HilbertLayout lay = HilbertLayout::standard(1, 4);
  TimeDependentH h = build_interaction_h(p, lay);
  h.finalize();
  CHECK(!h.is_static());

  Matrix h0 = Matrix(h.eval(0.0));
  const double g = p.g[0];
  // Sending mode talks to g-f, receiving mode to e-f, sqrt(n) ladder factors.
  for (int n = 1; n < 4; ++n) {
    CHECK(std::abs(h0(lay.flatten({kF, n - 1, 0}), lay.flatten({kG, n, 0})) -
                   g * std::sqrt(double(n))) < 1e-6);
    CHECK(std::abs(h0(lay.flatten({kF, 0, n - 1}), lay.flatten({kE, 0, n})) -
                   g * std::sqrt(double(n))) < 1e-6);
  }
  CHECK(std::abs(h0(lay.flatten({kE, 0, 0}), lay.flatten({kG, 0, 0})) - p.omega_drive) < 1e-9);
  CHECK(h0(lay.flatten({kF, 0, 0}), lay.flatten({kG, 1, 0})) ==
        std::conj(h0(lay.flatten({kG, 1, 0}), lay.flatten({kF, 0, 0}))));

  // The coupling rotates at the pair detuning; the drive does not.
  const double t1 = 0.3e-9;
  Matrix h1 = Matrix(h.eval(t1));
  Complex ratio = h1(lay.flatten({kF, 0, 0}), lay.flatten({kG, 1, 0})) /
                  h0(lay.flatten({kF, 0, 0}), lay.flatten({kG, 1, 0}));
  CHECK(std::abs(ratio - std::polar(1.0, p.delta_pair[0] * t1)) < 1e-12);
  CHECK(std::abs(h1(lay.flatten({kE, 0, 0}), lay.flatten({kG, 0, 0})) - p.omega_drive) < 1e-9);

  CHECK(h.hermiticity_defect(t1) < 1e-9);
  CHECK_THROWS_AS(build_interaction_h(p, HilbertLayout::modes_only(2, 4)), LayoutError);
}

TEST_CASE("dispersive Hamiltonian block on one shared excitation") {
  SystemParams p = SystemParams::defaults(1);
  p.g[0] = kTwoPi * 150e6;
  p.g[1] = kTwoPi * 120e6;  // break the symmetry so the three rates differ
  HilbertLayout lay = HilbertLayout::standard(1, 2);
  DerivedCouplings d = derive_couplings(p);
  Matrix h = build_dispersive_h(p, lay).dense();

  const long a = lay.flatten({kG, 1, 0});
  const long b = lay.flatten({kE, 0, 1});
  CHECK(h(a, a).real() == doctest::Approx(-2.0 * d.lambda_mode[0]).epsilon(1e-12));
  CHECK(h(b, b).real() == doctest::Approx(-2.0 * d.lambda_mode[1]).epsilon(1e-12));
  CHECK(h(b, a).real() == doctest::Approx(-2.0 * d.lambda_pair[0]).epsilon(1e-12));
  CHECK(h(a, b).real() == doctest::Approx(-2.0 * d.lambda_pair[0]).epsilon(1e-12));
  CHECK(std::abs(h(lay.flatten({kE, 1, 0}), a) - p.omega_drive) < 1e-9);

  // Pair photon number is conserved by every term except nothing: the drive
  // and Stark shifts are diagonal in it, the Raman term moves one photon
  // within the pair.
  SparseOperator npair = number_op(lay, 0) + number_op(lay, 1);
  SparseOperator hd = build_dispersive_h(p, lay);
  CHECK(max_abs(commutator(hd, npair).matrix()) / kLam < 1e-12);
}

TEST_CASE("beam splitter signs, vacuum, and qutrit neutrality") {
  SystemParams p = SystemParams::defaults(2);
  HilbertLayout lay = HilbertLayout::standard(2, 3);
  SparseOperator h = build_beam_splitter_h(p, lay);
  DerivedCouplings d = derive_couplings(p);
  Matrix m = h.dense();

  // Single-photon hop element is -lambda_pair[j]: -lambda on the first pair,
  // +lambda on the second.
  long s1 = lay.flatten({kG, 1, 0, 0, 0});
  long r1 = lay.flatten({kG, 0, 1, 0, 0});
  long s2 = lay.flatten({kG, 0, 0, 1, 0});
  long r2 = lay.flatten({kG, 0, 0, 0, 1});
  CHECK(m(r1, s1).real() == doctest::Approx(-kLam).epsilon(1e-12));
  CHECK(m(r2, s2).real() == doctest::Approx(kLam).epsilon(1e-12));
  CHECK(d.lambda_pair[1] == doctest::Approx(-kLam).epsilon(1e-12));

  // Vacuum is annihilated and the qutrit is untouched.
  Vector vac = Vector::Zero(lay.dim());
  vac(lay.flatten({kG, 0, 0, 0, 0})) = 1.0;
  CHECK((h * vac).norm() == 0.0);
  CHECK(max_abs(commutator(h, qutrit_op(lay, kE, kG)).matrix()) == 0.0);

  // Violated matching conditions are rejected with the failing ids.
  SystemParams skew = p;
  skew.g[1] *= 1.01;
  CHECK_THROWS_WITH_AS(build_beam_splitter_h(skew, lay),
                       doctest::Contains("pair-lambda-symmetry[0]"), ValidationError);
}

TEST_CASE("frame generator: Stark diagonal plus drive splitting") {
  SystemParams p = SystemParams::defaults(1);
  HilbertLayout lay = HilbertLayout::standard(1, 3);
  SparseOperator h = build_frame_h(p, lay);
  Matrix m = h.dense();

  CHECK(m(lay.flatten({kG, 1, 0}), lay.flatten({kG, 1, 0})).real() ==
        doctest::Approx(-kLam).epsilon(1e-12));
  CHECK(m(lay.flatten({kG, 2, 1}), lay.flatten({kG, 2, 1})).real() ==
        doctest::Approx(-3.0 * kLam).epsilon(1e-12));
  CHECK(std::abs(m(lay.flatten({kG, 0, 0}), lay.flatten({kE, 0, 0})) - p.omega_drive) < 1e-9);

  // (|g> + |e>)/sqrt2 x vacuum is an eigenvector at +omega_drive.
  Vector vac = Vector::Zero(9);
  vac(0) = 1.0;
  Vector plus = kron_vec(dressed_plus(), vac);
  CHECK((h * plus - Complex(p.omega_drive) * plus).norm() < 1e-6 * p.omega_drive);

  // Mode-only layouts just drop the drive.
  HilbertLayout modes = HilbertLayout::modes_only(2, 3);
  Matrix m2 = build_frame_h(p, modes).dense();
  CHECK(m2(modes.flatten({1, 2}), modes.flatten({1, 2})).real() ==
        doctest::Approx(-3.0 * kLam).epsilon(1e-12));
}

TEST_CASE("crosstalk phases and conservation") {
  SystemParams p = SystemParams::defaults(2);
  HilbertLayout lay = HilbertLayout::standard(2, 2);
  TimeDependentH h = build_crosstalk_h(p, lay);
  h.finalize();
  CHECK(!h.is_static());  // cross-family hops rotate at omega_eg

  // At t = 0 every phase is 1: H(0) = g_cross sum_{j<l} (hop + hc).
  Matrix h0 = Matrix(h.eval(0.0));
  long a01 = lay.flatten({kG, 1, 0, 0, 0});
  long b01 = lay.flatten({kG, 0, 1, 0, 0});
  long b02 = lay.flatten({kG, 0, 0, 1, 0});
  CHECK(std::abs(h0(b01, a01) - Complex(p.g_cross)) < 1e-9);
  CHECK(std::abs(h0(b02, a01) - Complex(p.g_cross)) < 1e-9);

  // Same-frequency hops are static, cross-family hops rotate at
  // omega_l - omega_j = -omega_eg for (sending, receiving).
  const double t1 = 2.4e-11;
  Matrix h1 = Matrix(h.eval(t1));
  CHECK(std::abs(h1(b02, a01) - Complex(p.g_cross)) < 1e-9);
  Complex want = std::polar(p.g_cross, (p.mode_freq[1] - p.mode_freq[0]) * t1);
  CHECK(std::abs(h1(b01, a01) - want) < 1e-9);
  CHECK(h.hermiticity_defect(t1) < 1e-9);

  // Together with the interaction term it conserves total excitation
  // number sum_m n_m + |f><f|.
  TimeDependentH full = build_interaction_h(p, lay);
  full.append(build_crosstalk_h(p, lay));
  full.finalize();
  SparseOperator excit = qutrit_op(lay, kF, kF);
  for (int m2 = 0; m2 < 4; ++m2) excit = excit + number_op(lay, m2);
  for (double t : {0.0, 1.3e-10, 7.7e-10}) {
    SparseMatrix ht = full.eval(t);
    SparseMatrix comm = ht * excit.matrix() - excit.matrix() * ht;
    CHECK(max_abs(comm) / p.g[0] < 1e-12);
  }

  SystemParams quiet = p;
  quiet.g_cross = 0.0;
  TimeDependentH none = build_crosstalk_h(quiet, lay);
  none.finalize();
  CHECK(none.nnz() == 0);
}

TEST_CASE("pulse leakage term") {
  SystemParams p = SystemParams::defaults(1);
  HilbertLayout lay = HilbertLayout::standard(1, 2);
  TimeDependentH h = build_pulse_leakage_h(p, lay);
  h.finalize();
  const double t1 = 1.7e-10;
  Matrix m = Matrix(h.eval(t1));
  long f0 = lay.flatten({kF, 0, 0});
  long e0 = lay.flatten({kE, 0, 0});
  CHECK(std::abs(m(f0, e0) - std::polar(p.omega_leak, p.delta_leak * t1)) <
        1e-12 * p.omega_leak);
  CHECK(m(e0, f0) == std::conj(m(f0, e0)));

  SystemParams quiet = p;
  quiet.omega_leak = 0.0;
  TimeDependentH none = build_pulse_leakage_h(quiet, lay);
  none.finalize();
  CHECK(none.nnz() == 0);
}

TEST_CASE("collapse channel inventory") {
  SystemParams p = SystemParams::defaults(3);
  HilbertLayout lay = HilbertLayout::standard(3, 3);
  CollapseSet set = build_collapse_set(p, lay);
  REQUIRE(set.channels.size() == 11);  // 6 photon loss + 3 relaxation + 2 dephasing

  for (int m = 0; m < 6; ++m) {
    CHECK(set.channels[m].name == "photon-loss[" + std::to_string(m) + "]");
    CHECK(set.channels[m].rate == doctest::Approx(5e4));
  }
  CHECK(set.channels[6].name == "relax-eg");
  CHECK(set.channels[6].rate == doctest::Approx(1.0 / 30e-6));
  CHECK(set.channels[8].name == "relax-fg");
  CHECK(set.channels[10].name == "dephase-f");
  CHECK(set.channels[10].rate == doctest::Approx(1.0 / 25e-6));
  // relax-fe lowers f to e.
  Vector f_state = Vector::Zero(lay.dim());
  f_state(lay.flatten({kF, 0, 0, 0, 0, 0, 0})) = 1.0;
  Vector lowered = set.channels[7].op * f_state;
  CHECK(std::abs(lowered(lay.flatten({kE, 0, 0, 0, 0, 0, 0})) - 1.0) < 1e-15);

  // Disabled rates drop their channels.
  SystemParams lossless = p;
  lossless.kappa.assign(6, 0.0);
  lossless.gamma_phi_e = 0.0;
  CHECK(build_collapse_set(lossless, lay).channels.size() == 4);
}

TEST_CASE("time-dependent builder mechanics") {
  HilbertLayout lay = HilbertLayout::modes_only(1, 3);
  SparseOperator a = annihilation(lay, 0);

  TimeDependentH h(lay);
  h.add_term(a, [](double t) { return std::polar(1.0, t); }, true);
  h.finalize();
  CHECK_THROWS_AS(h.add_static(a), ValidationError);

  Matrix want0 = a.dense() + a.adjoint().dense();
  CHECK((Matrix(h.eval(0.0)) - want0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((Matrix(h.eval(M_PI)) + want0).cwiseAbs().maxCoeff() < 1e-12);

  // Static-only builders assemble once and short-circuit eval.
  TimeDependentH s(lay);
  s.add_static(number_op(lay, 0), 2.0);
  s.finalize();
  CHECK(s.is_static());
  const SparseMatrix& first = s.eval(0.0);
  CHECK(&first == &s.eval(123.0));
  CHECK(Matrix(first)(2, 2) == Complex(4.0));

  // append merges terms before finalize and refuses afterwards.
  TimeDependentH merged(lay);
  merged.add_static(number_op(lay, 0));
  TimeDependentH other(lay);
  other.add_term(a, [](double) { return Complex(2.0); }, true);
  merged.append(other);
  merged.finalize();
  Matrix m = Matrix(merged.eval(0.0));
  CHECK(m(1, 1) == Complex(1.0));
  CHECK(std::abs(m(0, 1) - 2.0) < 1e-15);
  CHECK(std::abs(m(1, 0) - 2.0) < 1e-15);
  CHECK_THROWS_AS(merged.append(other), ValidationError);

  // Empty builders finalize to an all-zero Hamiltonian.
  TimeDependentH empty(lay);
  empty.finalize();
  CHECK(empty.nnz() == 0);
  CHECK(empty.eval(1.0).nonZeros() == 0);
}
