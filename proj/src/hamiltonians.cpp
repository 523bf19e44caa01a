#include "catw/hamiltonians.hpp"

#include <algorithm>
#include <cmath>

namespace catw {

void match_mode_frequencies(SystemParams& p) {
  if (p.n_pairs < 1) throw ValidationError("need at least one resonator pair");
  if (p.delta_pair.size() != static_cast<size_t>(p.n_pairs))
    throw ValidationError("parameter lists do not match n_pairs");
  p.mode_freq.assign(2 * p.n_pairs, 0.0);
  // The first pair sits below the transitions by delta, the remaining pairs
  // use the flipped convention (mode minus transition).
  p.mode_freq[0] = p.omega_fg() - p.delta_pair[0];
  p.mode_freq[1] = p.omega_fe - p.delta_pair[0];
  for (int j = 1; j < p.n_pairs; ++j) {
    p.mode_freq[2 * j] = p.omega_fg() + p.delta_pair[j];
    p.mode_freq[2 * j + 1] = p.omega_fe + p.delta_pair[j];
  }
}

SystemParams SystemParams::defaults(int n_pairs) {
  if (n_pairs < 1) throw ValidationError("need at least one resonator pair");
  SystemParams p;
  p.n_pairs = n_pairs;
  p.g.assign(2 * n_pairs, kTwoPi * 150e6);
  p.delta_pair.assign(n_pairs, -kTwoPi * 450e6);
  p.delta_pair[0] = kTwoPi * 450e6;
  p.omega_drive = kTwoPi * 250e6;
  p.omega_eg = kTwoPi * 7.5e9;
  p.omega_fe = kTwoPi * 5.0e9;
  match_mode_frequencies(p);
  const double lambda = p.g[0] * p.g[1] / (2.0 * std::abs(p.delta_pair[0]));
  p.g_cross = 0.02 * lambda;
  p.omega_leak = kTwoPi * 47e6;
  p.delta_leak = p.omega_fe - p.omega_eg;  // -2pi * 2.5 GHz
  p.kappa.assign(2 * n_pairs, 1.0 / 20e-6);
  p.gamma_eg = 1.0 / 30e-6;
  p.gamma_fe = 1.0 / 20e-6;
  p.gamma_fg = 1.0 / 60e-6;
  p.gamma_phi_e = 1.0 / 40e-6;
  p.gamma_phi_f = 1.0 / 25e-6;
  p.alpha = 0.5;
  return p;
}

namespace {

void check_param_shapes(const SystemParams& p) {
  const size_t n2 = 2 * static_cast<size_t>(p.n_pairs);
  if (p.g.size() != n2 || p.mode_freq.size() != n2 || p.kappa.size() != n2 ||
      p.delta_pair.size() != static_cast<size_t>(p.n_pairs))
    throw ValidationError("parameter lists do not match n_pairs");
  for (double d : p.delta_pair)
    if (d == 0.0) throw ValidationError("pair detuning must be nonzero");
  for (double k : p.kappa)
    if (k < 0.0) throw ValidationError("negative photon loss rate");
  if (p.gamma_eg < 0 || p.gamma_fe < 0 || p.gamma_fg < 0 || p.gamma_phi_e < 0 ||
      p.gamma_phi_f < 0)
    throw ValidationError("negative qutrit decoherence rate");
}

void check_layout_pairs(const SystemParams& p, const HilbertLayout& layout) {
  if (layout.n_modes() != 2 * p.n_pairs)
    throw LayoutError("layout mode count does not match n_pairs");
}

}  // namespace

DerivedCouplings derive_couplings(const SystemParams& p) {
  check_param_shapes(p);
  DerivedCouplings d;
  d.lambda_mode.resize(2 * p.n_pairs);
  d.lambda_pair.resize(p.n_pairs);
  for (int j = 0; j < p.n_pairs; ++j) {
    const double delta = p.delta_pair[j];
    d.lambda_mode[2 * j] = p.g[2 * j] * p.g[2 * j] / (2.0 * delta);
    d.lambda_mode[2 * j + 1] = p.g[2 * j + 1] * p.g[2 * j + 1] / (2.0 * delta);
    d.lambda_pair[j] = p.g[2 * j] * p.g[2 * j + 1] / (2.0 * delta);
  }
  d.lambda = std::abs(d.lambda_pair[0]);
  if (d.lambda == 0.0) throw ValidationError("first-pair coupling must be nonzero");
  d.t_transfer = M_PI / (2.0 * d.lambda);
  d.phi0 = p.omega_drive * M_PI / (2.0 * d.lambda);
  return d;
}

std::string ConditionReport::failures() const {
  std::string out;
  for (const auto& it : items) {
    if (it.pass) continue;
    if (!out.empty()) out += ", ";
    out += it.id;
  }
  return out;
}

ConditionReport validate_conditions(const SystemParams& p, double rel_tol) {
  const DerivedCouplings d = derive_couplings(p);
  ConditionReport rep;
  auto add = [&](std::string id, std::string detail, double residual) {
    ConditionItem it;
    it.id = std::move(id);
    it.detail = std::move(detail);
    it.residual = residual;
    it.tolerance = rel_tol;
    it.pass = residual <= rel_tol;
    rep.all_pass = rep.all_pass && it.pass;
    rep.items.push_back(std::move(it));
  };

  for (int j = 0; j < p.n_pairs; ++j) {
    add("pair-lambda-symmetry[" + std::to_string(j) + "]",
        "Stark rates of the two modes of a pair must coincide",
        std::abs(d.lambda_mode[2 * j] - d.lambda_mode[2 * j + 1]) / d.lambda);
    const double target = (j == 0) ? d.lambda : -d.lambda;
    add("pair-sign-alternation[" + std::to_string(j) + "]",
        "even-mode Stark rate must be +lambda on pair 1 and -lambda after",
        std::abs(d.lambda_mode[2 * j + 1] - target) / d.lambda);
  }
  const double r0 = p.g[0] * p.g[1] / p.delta_pair[0];
  for (int j = 1; j < p.n_pairs; ++j) {
    const double rj = p.g[2 * j] * p.g[2 * j + 1] / p.delta_pair[j];
    add("raman-rate-matching[" + std::to_string(j) + "]",
        "g_odd g_even / delta must be equal and opposite to pair 1",
        std::abs(r0 + rj) / std::abs(r0));
  }
  {
    const double s = std::abs(p.delta_pair[0]);
    add("frequency-matching[0a]", "delta_1 = omega_fg - omega_mode1",
        std::abs(p.delta_pair[0] - (p.omega_fg() - p.mode_freq[0])) / s);
    add("frequency-matching[0b]", "delta_1 = omega_fe - omega_mode2",
        std::abs(p.delta_pair[0] - (p.omega_fe - p.mode_freq[1])) / s);
  }
  for (int j = 1; j < p.n_pairs; ++j) {
    const double s = std::abs(p.delta_pair[j]);
    add("frequency-matching[" + std::to_string(j) + "a]",
        "delta_j = omega_odd - omega_fg",
        std::abs(p.delta_pair[j] - (p.mode_freq[2 * j] - p.omega_fg())) / s);
    add("frequency-matching[" + std::to_string(j) + "b]",
        "delta_j = omega_even - omega_fe",
        std::abs(p.delta_pair[j] - (p.mode_freq[2 * j + 1] - p.omega_fe)) / s);
  }

  for (int j = 0; j < p.n_pairs; ++j) {
    const double gmax = std::max(p.g[2 * j], p.g[2 * j + 1]);
    if (std::abs(p.delta_pair[j]) < 10.0 * gmax)
      rep.warnings.push_back("pair " + std::to_string(j + 1) +
                             " outside the dispersive margin |delta| >= 10 g");
  }
  double lmax = 0.0;
  for (double l : d.lambda_mode) lmax = std::max(lmax, std::abs(l));
  for (double l : d.lambda_pair) lmax = std::max(lmax, std::abs(l));
  if (2.0 * p.omega_drive < 10.0 * lmax)
    rep.warnings.push_back("drive below the strong-driving margin 2 omega >= 10 lambda");
  return rep;
}

void TimeDependentH::add_static(const SparseOperator& op, Complex weight) {
  if (finalized_) throw ValidationError("cannot add terms after finalize");
  if (op.layout() != layout_) throw LayoutError("term layout mismatch");
  Term t;
  t.op = op.matrix();
  t.weight = weight;
  terms_.push_back(std::move(t));
}

void TimeDependentH::add_term(const SparseOperator& op,
                              std::function<Complex(double)> coeff, bool add_hc) {
  if (finalized_) throw ValidationError("cannot add terms after finalize");
  if (op.layout() != layout_) throw LayoutError("term layout mismatch");
  Term t;
  t.op = op.matrix();
  t.coeff = std::move(coeff);
  t.hc = add_hc;
  terms_.push_back(std::move(t));
  static_only_ = false;
}

void TimeDependentH::append(const TimeDependentH& other) {
  if (finalized_ || other.finalized_)
    throw ValidationError("append requires un-finalized builders");
  if (other.layout_ != layout_) throw LayoutError("append layout mismatch");
  for (const auto& t : other.terms_) terms_.push_back(t);
  static_only_ = static_only_ && other.static_only_;
}

long TimeDependentH::nnz() const { return assembled_.nonZeros(); }

namespace {
// Value-slot index of (row, col) in a compressed row-major pattern.
int slot_of(const SparseMatrix& m, long row, long col) {
  const int* inner = m.innerIndexPtr();
  const int lo = m.outerIndexPtr()[row];
  const int hi = m.outerIndexPtr()[row + 1];
  const int* it = std::lower_bound(inner + lo, inner + hi, static_cast<int>(col));
  if (it == inner + hi || *it != col)
    throw ValidationError("internal: entry missing from union pattern");
  return static_cast<int>(it - inner);
}
}  // namespace

void TimeDependentH::finalize() {
  if (finalized_) return;
  if (layout_.dim() == 0) throw ValidationError("Hamiltonian builder has no layout");
  if (terms_.empty()) {
    assembled_ = SparseMatrix(layout_.dim(), layout_.dim());
    assembled_.makeCompressed();
    finalized_ = true;
    return;
  }
  // Union pattern with all-positive stand-in values so nothing cancels.
  SparseMatrix pattern(layout_.dim(), layout_.dim());
  for (const auto& t : terms_) {
    SparseMatrix abs_op = t.op;
    for (long k = 0; k < abs_op.nonZeros(); ++k)
      abs_op.valuePtr()[k] = std::abs(abs_op.valuePtr()[k]) + 1.0;
    pattern += abs_op;
    if (t.hc) pattern += SparseMatrix(abs_op.adjoint());
  }
  pattern.makeCompressed();
  assembled_ = pattern;
  for (long k = 0; k < assembled_.nonZeros(); ++k) assembled_.valuePtr()[k] = 0.0;

  for (auto& t : terms_) {
    t.slots.reserve(t.op.nonZeros());
    t.vals.reserve(t.op.nonZeros());
    for (long r = 0; r < t.op.rows(); ++r) {
      for (SparseMatrix::InnerIterator it(t.op, r); it; ++it) {
        t.slots.push_back(slot_of(assembled_, it.row(), it.col()));
        if (t.hc) t.hc_slots.push_back(slot_of(assembled_, it.col(), it.row()));
        t.vals.push_back(it.value());
      }
    }
  }
  finalized_ = true;
}

const SparseMatrix& TimeDependentH::eval(double t) {
  if (!finalized_) finalize();
  if (static_only_ && static_done_) return assembled_;
  Complex* out = assembled_.valuePtr();
  std::fill(out, out + assembled_.nonZeros(), Complex(0.0));
  for (const auto& term : terms_) {
    const Complex w = term.coeff ? term.coeff(t) : term.weight;
    const size_t n = term.vals.size();
    for (size_t k = 0; k < n; ++k) out[term.slots[k]] += w * term.vals[k];
    if (term.hc)
      for (size_t k = 0; k < n; ++k)
        out[term.hc_slots[k]] += std::conj(w * term.vals[k]);
  }
  static_done_ = true;
  return assembled_;
}

double TimeDependentH::hermiticity_defect(double t) {
  const SparseMatrix& h = eval(t);
  SparseMatrix diff = h - SparseMatrix(h.adjoint());
  return max_abs(diff);
}

TimeDependentH build_interaction_h(const SystemParams& p, const HilbertLayout& layout) {
  check_param_shapes(p);
  check_layout_pairs(p, layout);
  if (!layout.has_qutrit()) throw LayoutError("interaction Hamiltonian needs the qutrit");
  TimeDependentH h(layout);
  const SparseOperator s_fg = qutrit_op(layout, kF, kG);
  const SparseOperator s_fe = qutrit_op(layout, kF, kE);
  for (int j = 0; j < p.n_pairs; ++j) {
    const double delta = p.delta_pair[j];
    auto phase = [delta](double t) { return std::polar(1.0, delta * t); };
    SparseOperator odd = Complex(p.g[2 * j]) * (s_fg * annihilation(layout, 2 * j));
    SparseOperator even = Complex(p.g[2 * j + 1]) * (s_fe * annihilation(layout, 2 * j + 1));
    h.add_term(odd, phase, true);
    h.add_term(even, phase, true);
  }
  SparseOperator drive = qutrit_op(layout, kE, kG) + qutrit_op(layout, kG, kE);
  h.add_static(drive, p.omega_drive);
  return h;
}

SparseOperator build_dispersive_h(const SystemParams& p, const HilbertLayout& layout) {
  check_param_shapes(p);
  check_layout_pairs(p, layout);
  if (!layout.has_qutrit()) throw LayoutError("dispersive Hamiltonian needs the qutrit");
  const DerivedCouplings d = derive_couplings(p);
  const SparseOperator s_gg = qutrit_op(layout, kG, kG);
  const SparseOperator s_ee = qutrit_op(layout, kE, kE);
  const SparseOperator s_eg = qutrit_op(layout, kE, kG);  // |e><g|
  SparseOperator h = Complex(p.omega_drive) * (s_eg + s_eg.adjoint());
  for (int j = 0; j < p.n_pairs; ++j) {
    const SparseOperator n_odd = number_op(layout, 2 * j);
    const SparseOperator n_even = number_op(layout, 2 * j + 1);
    h = h + Complex(-2.0 * d.lambda_mode[2 * j]) * (n_odd * s_gg);
    h = h + Complex(-2.0 * d.lambda_mode[2 * j + 1]) * (n_even * s_ee);
    SparseOperator raman =
        annihilation(layout, 2 * j) * annihilation(layout, 2 * j + 1).adjoint() * s_eg;
    h = h + Complex(-2.0 * d.lambda_pair[j]) * (raman + raman.adjoint());
  }
  return h;
}

SparseOperator build_beam_splitter_h(const SystemParams& p, const HilbertLayout& layout) {
  check_param_shapes(p);
  check_layout_pairs(p, layout);
  const ConditionReport rep = validate_conditions(p);
  if (!rep.all_pass)
    throw ValidationError("matching conditions violated: " + rep.failures());
  const DerivedCouplings d = derive_couplings(p);
  SparseMatrix zero(layout.dim(), layout.dim());
  SparseOperator h(layout, zero);
  for (int j = 0; j < p.n_pairs; ++j) {
    SparseOperator hop = annihilation(layout, 2 * j) * annihilation(layout, 2 * j + 1).adjoint();
    h = h + Complex(-d.lambda_pair[j]) * (hop + hop.adjoint());
  }
  return h;
}

SparseOperator build_frame_h(const SystemParams& p, const HilbertLayout& layout) {
  check_param_shapes(p);
  check_layout_pairs(p, layout);
  const DerivedCouplings d = derive_couplings(p);
  SparseMatrix zero(layout.dim(), layout.dim());
  SparseOperator h(layout, zero);
  for (int m = 0; m < 2 * p.n_pairs; ++m)
    h = h + Complex(-d.lambda_mode[m]) * number_op(layout, m);
  if (layout.has_qutrit()) {
    // Drive eigenbasis: +omega on (|g>+|e>)/sqrt2, -omega on (|g>-|e>)/sqrt2,
    // i.e. omega_drive (|g><e| + |e><g|).
    SparseOperator sx = qutrit_op(layout, kG, kE) + qutrit_op(layout, kE, kG);
    h = h + Complex(p.omega_drive) * sx;
  }
  return h;
}

TimeDependentH build_crosstalk_h(const SystemParams& p, const HilbertLayout& layout) {
  check_param_shapes(p);
  check_layout_pairs(p, layout);
  TimeDependentH h(layout);
  if (p.g_cross == 0.0) return h;
  const int n = 2 * p.n_pairs;
  for (int j = 0; j < n; ++j) {
    for (int l = j + 1; l < n; ++l) {
      const double djl = p.mode_freq[l] - p.mode_freq[j];
      SparseOperator hop = annihilation(layout, j) * annihilation(layout, l).adjoint();
      if (djl == 0.0) {
        h.add_static(hop + hop.adjoint(), p.g_cross);
      } else {
        auto phase = [djl, gc = p.g_cross](double t) { return std::polar(gc, djl * t); };
        h.add_term(hop, phase, true);
      }
    }
  }
  return h;
}

TimeDependentH build_pulse_leakage_h(const SystemParams& p, const HilbertLayout& layout) {
  check_param_shapes(p);
  if (!layout.has_qutrit()) throw LayoutError("pulse leakage needs the qutrit");
  TimeDependentH h(layout);
  if (p.omega_leak == 0.0) return h;
  auto phase = [d = p.delta_leak, w = p.omega_leak](double t) { return std::polar(w, d * t); };
  h.add_term(qutrit_op(layout, kF, kE), phase, true);
  return h;
}

CollapseSet build_collapse_set(const SystemParams& p, const HilbertLayout& layout) {
  check_param_shapes(p);
  check_layout_pairs(p, layout);
  if (!layout.has_qutrit()) throw LayoutError("collapse set needs the qutrit");
  CollapseSet set;
  for (int m = 0; m < 2 * p.n_pairs; ++m) {
    if (p.kappa[m] == 0.0) continue;
    set.channels.push_back(
        {annihilation(layout, m), p.kappa[m], "photon-loss[" + std::to_string(m) + "]"});
  }
  if (p.gamma_eg > 0)
    set.channels.push_back({qutrit_op(layout, kG, kE), p.gamma_eg, "relax-eg"});
  if (p.gamma_fe > 0)
    set.channels.push_back({qutrit_op(layout, kE, kF), p.gamma_fe, "relax-fe"});
  if (p.gamma_fg > 0)
    set.channels.push_back({qutrit_op(layout, kG, kF), p.gamma_fg, "relax-fg"});
  // Projector form of dephasing; P^dag P = P, so this is also the standard
  // dissipator for the same operator.
  if (p.gamma_phi_e > 0)
    set.channels.push_back({qutrit_op(layout, kE, kE), p.gamma_phi_e, "dephase-e"});
  if (p.gamma_phi_f > 0)
    set.channels.push_back({qutrit_op(layout, kF, kF), p.gamma_phi_f, "dephase-f"});
  return set;
}

}  // namespace catw
