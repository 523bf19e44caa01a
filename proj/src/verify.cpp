#include "catw/verify.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <utility>

#include "catw/analysis.hpp"
#include "catw/dynamics.hpp"
#include "catw/hamiltonians.hpp"
#include "catw/states.hpp"

namespace catw {

namespace {

void add_item(CheckReport& rep, std::string name, double metric, double bound,
              std::string detail = "") {
  CheckItem item;
  item.name = std::move(name);
  item.metric = metric;
  item.bound = bound;
  item.pass = metric <= bound;
  item.detail = std::move(detail);
  rep.all_pass = rep.all_pass && item.pass;
  rep.items.push_back(std::move(item));
}

Vector vac(int d) {
  Vector v = Vector::Zero(d);
  v(0) = 1.0;
  return v;
}

// Relative Hermiticity defect of every builder on the reference system,
// sampled at pseudo-random times over two transfer windows.
void check_builders(CheckReport& rep, int n_times) {
  const SystemParams p = SystemParams::defaults(3);
  const HilbertLayout layout = HilbertLayout::standard(3, 3, true);
  const DerivedCouplings dc = derive_couplings(p);

  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> at(0.0, 2.0 * dc.t_transfer);

  double worst = 0.0;
  std::pair<const char*, TimeDependentH> tds[] = {
      {"interaction", build_interaction_h(p, layout)},
      {"crosstalk", build_crosstalk_h(p, layout)},
      {"pulse-leakage", build_pulse_leakage_h(p, layout)},
  };
  for (auto& [name, h] : tds) {
    h.finalize();
    for (int i = 0; i < n_times; ++i) {
      const double t = at(rng);
      const double defect = h.hermiticity_defect(t);
      const double scale = max_abs(h.eval(t));
      if (scale > 0.0) worst = std::max(worst, defect / scale);
    }
  }
  const SparseOperator statics[] = {build_dispersive_h(p, layout),
                                    build_beam_splitter_h(p, layout),
                                    build_frame_h(p, layout)};
  for (const SparseOperator& op : statics)
    worst = std::max(worst, op.hermiticity_defect() / max_abs(op.matrix()));

  char detail[64];
  std::snprintf(detail, sizeof detail, "six builders, %d sampled times", n_times);
  add_item(rep, "builder-hermiticity", worst, 1e-12, detail);
}

// The pair hops commute, sum to the full beam splitter, and conserve each
// pair's photon total and parity product.
void check_beam_splitter_algebra(CheckReport& rep) {
  const SystemParams p = SystemParams::defaults(3);
  const DerivedCouplings dc = derive_couplings(p);
  const HilbertLayout modes = HilbertLayout::modes_only(6, 3);
  const SparseOperator h_e = build_beam_splitter_h(p, modes);

  std::vector<SparseOperator> hops;
  for (int j = 0; j < 3; ++j) {
    const SparseOperator x =
        annihilation(modes, 2 * j).adjoint() * annihilation(modes, 2 * j + 1);
    hops.push_back(Complex(-dc.lambda_pair[j]) * (x + x.adjoint()));
  }
  SparseOperator sum = hops[0] + hops[1] + hops[2];
  add_item(rep, "hop-decomposition", max_abs((h_e - sum).matrix()) / dc.lambda, 1e-14,
           "beam splitter equals the sum of its pair hops");

  double comm = 0.0;
  for (int j = 0; j < 3; ++j)
    for (int l = j + 1; l < 3; ++l)
      comm = std::max(comm, max_abs(commutator(hops[j], hops[l]).matrix()));
  add_item(rep, "hop-commutation", comm / (dc.lambda * dc.lambda), 1e-14);

  double photon = 0.0, parity = 0.0;
  for (int j = 0; j < 3; ++j) {
    const SparseOperator n_pair =
        number_op(modes, 2 * j) + number_op(modes, 2 * j + 1);
    const SparseOperator par =
        mode_parity(modes, 2 * j) * mode_parity(modes, 2 * j + 1);
    photon = std::max(photon, max_abs(commutator(h_e, n_pair).matrix()));
    parity = std::max(parity, max_abs(commutator(h_e, par).matrix()));
  }
  add_item(rep, "pair-photon-conservation", photon / dc.lambda, 1e-14);
  add_item(rep, "pair-parity-conservation", parity / dc.lambda, 1e-14);
}

// The dispersive Hamiltonian conserves each pair's photon total; the
// interaction picture with crosstalk conserves total photons plus the f
// population.
void check_conservation(CheckReport& rep, int n_times) {
  const SystemParams p2 = SystemParams::defaults(2);
  const HilbertLayout lay2 = HilbertLayout::standard(2, 3, true);
  const SparseOperator h_d = build_dispersive_h(p2, lay2);
  double disp = 0.0;
  for (int j = 0; j < 2; ++j) {
    const SparseOperator n_pair =
        number_op(lay2, 2 * j) + number_op(lay2, 2 * j + 1);
    disp = std::max(disp, max_abs(commutator(h_d, n_pair).matrix()));
  }
  add_item(rep, "dispersive-pair-photon", disp / max_abs(h_d.matrix()), 1e-12);

  const SystemParams p = SystemParams::defaults(3);
  const HilbertLayout layout = HilbertLayout::standard(3, 3, true);
  const DerivedCouplings dc = derive_couplings(p);
  TimeDependentH h = build_interaction_h(p, layout);
  h.append(build_crosstalk_h(p, layout));
  h.finalize();

  SparseOperator q = qutrit_op(layout, kF, kF);
  for (int m = 0; m < 6; ++m) q = q + number_op(layout, m);

  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> at(0.0, 2.0 * dc.t_transfer);
  double worst = 0.0;
  for (int i = 0; i < n_times; ++i) {
    const SparseMatrix hm = h.eval(at(rng));
    const SparseOperator op(layout, hm);
    worst = std::max(worst, max_abs(commutator(op, q).matrix()) / max_abs(hm));
  }
  add_item(rep, "excitation-conservation", worst, 1e-12,
           "interaction + crosstalk vs total photons + f population");
}

void check_cat_orthogonality(CheckReport& rep) {
  double worst = 0.0;
  for (double alpha : {0.3, 0.5, 1.0, 2.0}) {
    const int d = default_cutoff(alpha);
    const Vector even = cat_ket({alpha, CatParity::Even, 0.0}, d);
    const Vector odd = cat_ket({alpha, CatParity::Odd, 0.0}, d);
    worst = std::max(worst, std::abs(even.dot(odd)));
  }
  add_item(rep, "cat-orthogonality", worst, 1e-15, "alpha in {0.3, 0.5, 1, 2}");
}

void check_swap(CheckReport& rep) {
  const double lambda = kTwoPi * 25e6;
  const double t = M_PI / (2.0 * lambda);
  const SwapCheckReport swap =
      heisenberg_swap_check(lambda, t, HilbertLayout::modes_only(2, 6));
  add_item(rep, "swap-identity", swap.max_deviation, 1e-10,
           "both hop conventions at lambda t = pi/2");
  // A wrong sign for the later pairs would land on the other convention's
  // coefficient; the two differ by 2i at the swap point.
  const double gap =
      std::abs(swap.items.at(0).coeff_swap - swap.items.at(1).coeff_swap);
  add_item(rep, "swap-sign-sensitivity", std::abs(2.0 - gap), 0.1);
}

void check_condition_validation(CheckReport& rep) {
  const bool defaults_ok = validate_conditions(SystemParams::defaults(3)).all_pass;
  SystemParams bad = SystemParams::defaults(3);
  bad.g[1] *= 1.01;
  const ConditionReport broken = validate_conditions(bad);
  const bool caught = !broken.all_pass &&
                      broken.failures().find("pair-lambda-symmetry") != std::string::npos;
  add_item(rep, "condition-validation", (defaults_ok && caught) ? 0.0 : 1.0, 0.5,
           defaults_ok ? "defaults pass; injected mismatch caught: " + broken.failures()
                       : "reference parameters failed validation");
}

struct SmallSystem {
  SystemParams p;
  HilbertLayout layout;
  HilbertLayout modes;
  QuantumState state0;
  Vector target;
};

// One pair with qutrit, encoded cat on the odd mode.
SmallSystem small_system(int cutoff) {
  SmallSystem s{SystemParams::defaults(1),
                HilbertLayout::standard(1, cutoff, true),
                HilbertLayout::modes_only(2, cutoff),
                QuantumState::unchecked_ket(HilbertLayout(), Vector()),
                Vector()};
  WStateSpec w;
  w.n_pairs = 1;
  w.alpha = s.p.alpha;
  s.target = ideal_target(w, s.modes);
  s.state0 = QuantumState::ket(s.layout, kron_vec(dressed_plus(), w_state(w, s.modes)));
  return s;
}

void check_closed_norm(CheckReport& rep) {
  SmallSystem s = small_system(4);
  const DerivedCouplings dc = derive_couplings(s.p);
  TimeDependentH h = build_interaction_h(s.p, s.layout);

  SolverConfig cfg;
  cfg.dt = dc.t_transfer / 2000.0;
  cfg.n_steps = 500;
  cfg.sample_stride = 100;
  const SimulationResult res = evolve_closed(h, s.state0, cfg);
  add_item(rep, "closed-norm", res.max_norm_drift, 1e-9,
           "one pair, quarter transfer window");
}

void check_lindblad_invariants(CheckReport& rep) {
  SmallSystem s = small_system(3);
  const DerivedCouplings dc = derive_couplings(s.p);
  TimeDependentH h = build_interaction_h(s.p, s.layout);
  const CollapseSet collapse = build_collapse_set(s.p, s.layout);

  SolverConfig cfg;
  cfg.method = Method::LindbladRk4;
  cfg.dt = dc.t_transfer / 5000.0;
  cfg.n_steps = 500;
  cfg.sample_stride = 50;
  cfg.min_eig_iters = 25;
  const SimulationResult res = evolve_lindblad(h, collapse, s.state0, cfg);
  add_item(rep, "lindblad-trace", res.max_trace_drift, 1e-8);
  add_item(rep, "lindblad-hermiticity", res.max_herm_defect, 1e-10);
  add_item(rep, "lindblad-positivity", std::max(0.0, -res.min_eig_estimate), 1e-8);
}

void check_unitary_limit(CheckReport& rep) {
  SmallSystem s = small_system(3);
  s.p.kappa.assign(2, 0.0);
  s.p.gamma_eg = s.p.gamma_fe = s.p.gamma_fg = 0.0;
  s.p.gamma_phi_e = s.p.gamma_phi_f = 0.0;
  const DerivedCouplings dc = derive_couplings(s.p);
  TimeDependentH h = build_interaction_h(s.p, s.layout);
  const Observer obs(s.layout, s.target);

  SolverConfig cfg;
  cfg.dt = dc.t_transfer / 2000.0;
  cfg.n_steps = 400;
  cfg.sample_stride = 40;
  const SimulationResult closed = evolve_closed(h, s.state0, cfg, &obs);
  cfg.method = Method::LindbladRk4;
  const SimulationResult lind =
      evolve_lindblad(h, CollapseSet{}, s.state0, cfg, &obs);

  double diff = 0.0;
  for (size_t i = 0; i < closed.rows.size(); ++i)
    diff = std::max(diff,
                    std::abs(closed.rows[i].fidelity_sq - lind.rows[i].fidelity_sq));
  add_item(rep, "unitary-limit", diff, 1e-8,
           "master equation with no channels matches the closed run");
}

bool rows_identical(const std::vector<SampleRow>& a, const std::vector<SampleRow>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].t != b[i].t || a[i].fidelity_sq != b[i].fidelity_sq ||
        a[i].trace != b[i].trace || a[i].pop_g != b[i].pop_g ||
        a[i].pop_e != b[i].pop_e || a[i].pop_f != b[i].pop_f ||
        a[i].pair_n != b[i].pair_n)
      return false;
  }
  return true;
}

void check_determinism(CheckReport& rep) {
  SmallSystem s = small_system(3);
  const DerivedCouplings dc = derive_couplings(s.p);
  TimeDependentH h = build_interaction_h(s.p, s.layout);
  const CollapseSet collapse = build_collapse_set(s.p, s.layout);
  const Observer obs(s.layout, s.target);

  SolverConfig cfg;
  cfg.method = Method::LindbladRk4;
  cfg.dt = dc.t_transfer / 5000.0;
  cfg.n_steps = 200;
  cfg.sample_stride = 20;
  const SimulationResult la = evolve_lindblad(h, collapse, s.state0, cfg, &obs);
  const SimulationResult lb = evolve_lindblad(h, collapse, s.state0, cfg, &obs);

  cfg.method = Method::Trajectories;
  cfg.n_trajectories = 8;
  cfg.seed = 7;
  const SimulationResult ta = evolve_trajectories(h, collapse, s.state0, cfg, &obs);
  const SimulationResult tb = evolve_trajectories(h, collapse, s.state0, cfg, &obs);

  const bool same = rows_identical(la.rows, lb.rows) && rows_identical(ta.rows, tb.rows);
  add_item(rep, "determinism", same ? 0.0 : 1.0, 0.5,
           "repeated Lindblad and trajectory runs are bit-identical");
}

// Independent pairs stay product states under the beam splitter: joint
// evolution equals the tensor product of per-pair evolutions.
void check_pair_factorization(CheckReport& rep) {
  const SystemParams p = SystemParams::defaults(2);
  const DerivedCouplings dc = derive_couplings(p);
  const int d = 3;
  const HilbertLayout joint = HilbertLayout::modes_only(4, d);
  const HilbertLayout pair = HilbertLayout::modes_only(2, d);

  const Vector even = cat_ket({0.5, CatParity::Even, 0.0}, d);
  const Vector odd = cat_ket({0.5, CatParity::Odd, 0.0}, d);
  const Vector psi1 = kron_vec(even, vac(d));
  const Vector psi2 = kron_vec(odd, vac(d));

  SolverConfig cfg;
  cfg.dt = dc.t_transfer / 2000.0;
  cfg.n_steps = 1000;  // half transfer: both hops mid-swap

  TimeDependentH hj(joint);
  hj.add_static(build_beam_splitter_h(p, joint));
  const Vector joint_final =
      evolve_closed(hj, QuantumState::ket(joint, kron_vec(psi1, psi2)), cfg).final_psi;

  Vector finals[2];
  for (int j = 0; j < 2; ++j) {
    const SparseOperator x = annihilation(pair, 0).adjoint() * annihilation(pair, 1);
    TimeDependentH hp(pair);
    hp.add_static(Complex(-dc.lambda_pair[j]) * (x + x.adjoint()));
    finals[j] =
        evolve_closed(hp, QuantumState::ket(pair, j == 0 ? psi1 : psi2), cfg).final_psi;
  }
  const double diff =
      (joint_final - kron_vec(finals[0], finals[1])).cwiseAbs().maxCoeff();
  add_item(rep, "pair-factorization", diff, 1e-8,
           "two pairs, joint vs per-pair closed evolution");
}

}  // namespace

CheckReport run_checks(bool fast) {
  CheckReport rep;
  check_builders(rep, fast ? 10 : 100);
  check_beam_splitter_algebra(rep);
  check_conservation(rep, fast ? 5 : 20);
  check_cat_orthogonality(rep);
  check_swap(rep);
  check_condition_validation(rep);
  if (!fast) {
    check_closed_norm(rep);
    check_lindblad_invariants(rep);
    check_unitary_limit(rep);
    check_pair_factorization(rep);
  }
  check_determinism(rep);
  return rep;
}

std::string format_check_report(const CheckReport& report) {
  std::string out;
  int passed = 0;
  for (const CheckItem& it : report.items) {
    char line[96];
    std::snprintf(line, sizeof line, "[%s] %-28s metric %9.3g  bound %9.3g  ",
                  it.pass ? "pass" : "FAIL", it.name.c_str(), it.metric, it.bound);
    out += line;
    out += it.detail;
    out += '\n';
    if (it.pass) ++passed;
  }
  char tail[64];
  std::snprintf(tail, sizeof tail, "%d/%zu checks passed\n", passed,
                report.items.size());
  out += tail;
  return out;
}

}  // namespace catw
