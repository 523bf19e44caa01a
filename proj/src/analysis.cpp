#include "catw/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <unsupported/Eigen/MatrixFunctions>

#include "catw/kernels.hpp"

namespace catw {

namespace {

// Flattened-index offsets of a subsystem group, enumerated row-major with the
// first listed subsystem slowest. offset[multi-index] is the contribution of
// those subsystems to the full flattened index.
std::vector<long> offset_table(const HilbertLayout& layout, const std::vector<int>& subs) {
  std::vector<long> off{0};
  for (int s : subs) {
    const int d = layout.subsystem_dim(s);
    const long stride = layout.stride(s);
    std::vector<long> next;
    next.reserve(off.size() * static_cast<size_t>(d));
    for (long base : off)
      for (int k = 0; k < d; ++k) next.push_back(base + k * stride);
    off = std::move(next);
  }
  return off;
}

}  // namespace

QuantumState partial_trace(const QuantumState& state, const std::vector<int>& keep) {
  const HilbertLayout& layout = state.layout();
  if (keep.empty()) throw LayoutError("partial_trace: keep set is empty");

  std::vector<int> kept = keep;
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.size() != keep.size())
    throw LayoutError("partial_trace: keep set has duplicates");
  if (kept.front() < 0 || kept.back() >= layout.n_subsystems())
    throw LayoutError("partial_trace: subsystem index out of range");

  std::vector<int> traced;
  for (int s = 0; s < layout.n_subsystems(); ++s)
    if (!std::binary_search(kept.begin(), kept.end(), s)) traced.push_back(s);

  const std::vector<long> ko = offset_table(layout, kept);
  const std::vector<long> to = offset_table(layout, traced);
  const long nk = static_cast<long>(ko.size());

  Matrix red = Matrix::Zero(nk, nk);
  if (state.is_ket()) {
    const Vector& psi = state.vec();
    for (long a = 0; a < nk; ++a)
      for (long b = 0; b < nk; ++b) {
        Complex acc = 0.0;
        for (long r : to) acc += psi(ko[a] + r) * std::conj(psi(ko[b] + r));
        red(a, b) = acc;
      }
  } else {
    const Matrix& rho = state.rho();
    for (long a = 0; a < nk; ++a)
      for (long b = 0; b < nk; ++b) {
        Complex acc = 0.0;
        for (long r : to) acc += rho(ko[a] + r, ko[b] + r);
        red(a, b) = acc;
      }
  }

  const bool red_qutrit = layout.has_qutrit() && kept.front() == 0;
  std::vector<int> red_cutoffs;
  for (int s : kept) {
    if (layout.has_qutrit() && s == 0) continue;
    red_cutoffs.push_back(layout.mode_cutoff(s - (layout.has_qutrit() ? 1 : 0)));
  }
  return QuantumState::unchecked_density(HilbertLayout(red_qutrit, red_cutoffs),
                                         std::move(red));
}

double fidelity_sq(const QuantumState& ideal, const QuantumState& state) {
  if (!ideal.is_ket()) throw ValidationError("fidelity: the ideal state must be a ket");
  if (ideal.layout() != state.layout())
    throw LayoutError("fidelity: ideal and state layouts differ");
  double v;
  if (state.is_ket()) {
    v = std::norm(kernels::dot(ideal.vec(), state.vec()));
  } else {
    v = kernels::quad_form(ideal.vec(), state.rho()).real();
  }
  return std::max(v, 0.0);
}

double fidelity(const QuantumState& ideal, const QuantumState& state) {
  return std::sqrt(fidelity_sq(ideal, state));
}

SwapCheckReport heisenberg_swap_check(double lambda, double t,
                                      const HilbertLayout& pair_layout) {
  if (pair_layout.has_qutrit() || pair_layout.n_modes() != 2)
    throw LayoutError("heisenberg_swap_check needs a two-mode layout without qutrit");

  const Matrix ad_odd = annihilation(pair_layout, 0).adjoint().dense();
  const Matrix ad_even = annihilation(pair_layout, 1).adjoint().dense();
  const Matrix hop = ad_odd * annihilation(pair_layout, 1).dense();  // adag_odd a_even
  const long dim = pair_layout.dim();

  // Columns safe from the truncation edge: the hop conserves the pair photon
  // total and adag raises it by one, so totals up to cutoff - 2 stay faithful.
  const int guard = std::min(pair_layout.mode_cutoff(0), pair_layout.mode_cutoff(1)) - 2;
  std::vector<char> guarded(dim, 0);
  for (long j = 0; j < dim; ++j) {
    const auto occ = pair_layout.unflatten(j);
    guarded[j] = (occ[0] + occ[1] <= guard) ? 1 : 0;
  }

  SwapCheckReport report;
  report.lambda_t = lambda * t;
  const double c = std::cos(lambda * t);
  const double s = std::sin(lambda * t);

  for (int later = 0; later <= 1; ++later) {
    const double sign = later ? 1.0 : -1.0;
    const Matrix h = sign * lambda * (hop + hop.adjoint());
    const Matrix u = (Complex(0.0, -t) * h).exp();
    const Matrix transformed = u * ad_odd * u.adjoint();
    const Matrix expected = c * ad_odd + Complex(0.0, -sign * s) * ad_even;

    SwapCheckItem item;
    item.convention = later ? "later-pair" : "first-pair";
    Complex keep_num = 0.0, swap_num = 0.0;
    double keep_den = 0.0, swap_den = 0.0;
    for (long j = 0; j < dim; ++j) {
      if (!guarded[j]) continue;
      for (long i = 0; i < dim; ++i) {
        const Complex v = transformed(i, j);
        item.max_deviation = std::max(item.max_deviation, std::abs(v - expected(i, j)));
        keep_num += std::conj(ad_odd(i, j)) * v;
        keep_den += std::norm(ad_odd(i, j));
        swap_num += std::conj(ad_even(i, j)) * v;
        swap_den += std::norm(ad_even(i, j));
      }
    }
    item.coeff_keep = keep_den > 0.0 ? keep_num / keep_den : 0.0;
    item.coeff_swap = swap_den > 0.0 ? swap_num / swap_den : 0.0;
    report.max_deviation = std::max(report.max_deviation, item.max_deviation);
    report.items.push_back(std::move(item));
  }
  return report;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Fit1d {
  double x = 0.0;
  double value = 0.0;
};

// Coarse scan over one period followed by golden-section refinement of the
// best bracket. The objective need not be unimodal globally; the scan is
// dense enough for the trigonometric polynomials fitted here.
Fit1d maximize_periodic(const std::function<double(double)>& f, double period,
                        int n_coarse, double x_tol) {
  std::vector<double> vals(n_coarse);
  const double step = period / n_coarse;
  int best = 0;
  for (int i = 0; i < n_coarse; ++i) {
    vals[i] = f(-0.5 * period + i * step);
    if (vals[i] > vals[best]) best = i;
  }
  double lo = -0.5 * period + (best - 1) * step;
  double hi = -0.5 * period + (best + 1) * step;

  const double inv_phi = 0.6180339887498949;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > x_tol) {
    if (fc > fd) {
      hi = d; d = c; fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c; c = d; fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  Fit1d out;
  out.x = 0.5 * (lo + hi);
  out.value = f(out.x);
  return out;
}

// Into (-period/2, period/2].
double wrap_angle(double x, double period) {
  double y = std::remainder(x, period);
  if (y <= -0.5 * period) y += period;
  return y;
}

}  // namespace

PhaseFit fit_cat_phase(const QuantumState& mode_state, const CatParams& reference) {
  const HilbertLayout& layout = mode_state.layout();
  if (layout.has_qutrit() || layout.n_modes() != 1)
    throw LayoutError("fit_cat_phase expects a single-mode state");
  const int cutoff = layout.mode_cutoff(0);

  auto overlap = [&](double theta) {
    CatParams p = reference;
    p.theta = theta;
    return fidelity_sq(QuantumState::unchecked_ket(layout, cat_ket(p, cutoff)),
                       mode_state);
  };
  // |<cat(theta)|psi>|^2 is pi-periodic: theta -> theta + pi maps either
  // parity's cat to itself up to sign.
  const Fit1d fit = maximize_periodic(overlap, kPi, 64, 1e-8);

  PhaseFit out;
  out.overlap_sq = fit.value;
  out.residual = 1.0 - fit.value;
  out.transferred = std::sqrt(std::max(fit.value, 0.0)) >= 0.5;
  if (out.transferred) out.theta = wrap_angle(fit.x, kPi);
  return out;
}

PhaseReport extract_phases(const QuantumState& cavity_state, const WStateSpec& spec) {
  const HilbertLayout& layout = cavity_state.layout();
  if (layout.has_qutrit())
    throw LayoutError("extract_phases expects a cavity-only state; trace out the qutrit first");
  if (layout.n_modes() != 2 * spec.n_pairs)
    throw LayoutError("extract_phases: layout does not match the register spec");

  const int n = spec.n_pairs;
  auto overlap = [&](const std::vector<double>& theta) {
    WStateSpec s = spec;
    s.theta = theta;
    return fidelity_sq(QuantumState::unchecked_ket(layout, ideal_target(s, layout)),
                       cavity_state);
  };

  std::vector<double> theta(n, 0.0);
  double best = overlap(theta);
  for (int sweep = 0; sweep < 32; ++sweep) {
    const double before = best;
    for (int k = 0; k < n; ++k) {
      auto slice = [&](double x) {
        std::vector<double> probe = theta;
        probe[k] = x;
        return overlap(probe);
      };
      const Fit1d fit = maximize_periodic(slice, 2.0 * kPi, 64, 1e-8);
      if (fit.value > best) {
        best = fit.value;
        theta[k] = fit.x;
      }
    }
    if (best - before < 1e-12) break;
  }

  PhaseReport report;
  report.overlap_sq = best;
  report.residual = 1.0 - best;
  report.transferred = std::sqrt(std::max(best, 0.0)) >= 0.5;
  if (report.transferred) {
    for (int k = 0; k < n; ++k) {
      report.modes.push_back(2 * k + 1);
      report.theta.push_back(wrap_angle(theta[k], 2.0 * kPi));
    }
  }
  return report;
}

ObservableSet observables(const QuantumState& state) {
  const HilbertLayout& layout = state.layout();
  const long dim = layout.dim();

  Eigen::VectorXd prob(dim);
  if (state.is_ket()) {
    const Vector& psi = state.vec();
    for (long i = 0; i < dim; ++i) prob(i) = std::norm(psi(i));
  } else {
    const Matrix& rho = state.rho();
    for (long i = 0; i < dim; ++i) prob(i) = rho(i, i).real();
  }

  ObservableSet out;
  const int n_modes = layout.n_modes();
  out.mode_photon.assign(n_modes, 0.0);
  out.mode_parity.assign(n_modes, 0.0);
  if (layout.has_qutrit()) out.qutrit_pops.assign(3, 0.0);
  out.trace = prob.sum();

  for (long i = 0; i < dim; ++i) {
    const double p = prob(i);
    for (int m = 0; m < n_modes; ++m) {
      const int s = layout.mode_subsystem(m);
      const int occ = static_cast<int>((i / layout.stride(s)) % layout.subsystem_dim(s));
      out.mode_photon[m] += occ * p;
      out.mode_parity[m] += (occ % 2 == 0) ? p : -p;
    }
    if (layout.has_qutrit())
      out.qutrit_pops[static_cast<int>((i / layout.stride(0)) % 3)] += p;
  }

  out.pair_photon.assign(layout.n_pairs(), 0.0);
  for (int k = 0; k < layout.n_pairs(); ++k)
    out.pair_photon[k] = out.mode_photon[2 * k] + out.mode_photon[2 * k + 1];
  return out;
}

}  // namespace catw
