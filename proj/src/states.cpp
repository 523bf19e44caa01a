#include "catw/states.hpp"

#include <cmath>

namespace catw {

namespace {

// Unnormalized |c_n|^2 = x^n / n! with x = alpha^2, accumulated iteratively
// to avoid factorial overflow.
std::vector<double> abs2_series(double alpha, int n_max) {
  const double x = alpha * alpha;
  std::vector<double> p(n_max + 1);
  p[0] = 1.0;
  for (int n = 1; n <= n_max; ++n) p[n] = p[n - 1] * x / n;
  return p;
}

int parity_of(CatParity p) { return p == CatParity::Even ? 0 : 1; }

}  // namespace

Vector cat_ket(const CatParams& p, int cutoff) {
  if (cutoff < 2) throw ValidationError("cat state needs cutoff >= 2");
  if (p.alpha <= 0.0) throw ValidationError("cat amplitude alpha must be positive");
  const int par = parity_of(p.parity);
  Vector v = Vector::Zero(cutoff);
  double logfac = 0.0;  // log(n!)
  for (int n = 0; n < cutoff; ++n) {
    if (n > 0) logfac += std::log(double(n));
    if (n % 2 != par) continue;
    const double mag = std::exp(n * std::log(p.alpha) - 0.5 * logfac);
    v(n) = std::polar(mag, p.theta * n);
  }
  const double norm = v.norm();
  if (norm == 0.0) throw ValidationError("cat state has no support below the cutoff");
  return v / norm;
}

double cat_mean_photon(const CatParams& p, int cutoff) {
  Vector v = cat_ket(p, cutoff);
  double n_mean = 0.0;
  for (int n = 0; n < cutoff; ++n) n_mean += n * std::norm(v(n));
  return n_mean;
}

TruncationReport truncation_report(double alpha, int cutoff) {
  if (alpha <= 0.0) throw ValidationError("cat amplitude alpha must be positive");
  // Sum far enough that the remainder is negligible at double precision.
  const int n_max = std::max(cutoff + 8, 4 * static_cast<int>(alpha * alpha) + 64);
  const auto p = abs2_series(alpha, n_max);
  TruncationReport rep;
  for (int par = 0; par <= 1; ++par) {
    double total = 0.0, kept = 0.0;
    for (int n = par; n <= n_max; n += 2) {
      total += p[n];
      if (n < cutoff) kept += p[n];
    }
    const double tail = 1.0 - kept / total;
    (par == 0 ? rep.even_tail : rep.odd_tail) = tail;
  }
  return rep;
}

int default_cutoff(double alpha, double tol) {
  for (int d = 2; d <= 256; ++d) {
    if (truncation_report(alpha, d).even_tail < tol) return d;
  }
  throw ValidationError("no cutoff below 256 meets the truncation tolerance");
}

namespace {

Vector w_state_impl(const WStateSpec& spec, const HilbertLayout& layout, WTarget target) {
  if (layout.has_qutrit())
    throw LayoutError("w_state expects a cavity-only layout (qutrit handled separately)");
  if (layout.n_modes() != 2 * spec.n_pairs)
    throw LayoutError("w_state layout must have 2*n_pairs modes");
  if (!spec.theta.empty() && static_cast<int>(spec.theta.size()) != spec.n_pairs)
    throw ValidationError("w_state: theta list must have one angle per pair");

  auto theta_of = [&](int pair) { return spec.theta.empty() ? 0.0 : spec.theta[pair]; };
  auto target_mode = [&](int pair) {
    return target == WTarget::OddModes ? 2 * pair : 2 * pair + 1;
  };

  Vector acc = Vector::Zero(layout.dim());
  for (int k = 0; k < spec.n_pairs; ++k) {
    Vector branch(1);
    branch(0) = 1.0;
    for (int m = 0; m < layout.n_modes(); ++m) {
      const int d = layout.mode_cutoff(m);
      Vector factor;
      const int pair = m / 2;
      if (m == target_mode(pair)) {
        CatParams cp{spec.alpha, pair == k ? CatParity::Odd : CatParity::Even, theta_of(pair)};
        factor = cat_ket(cp, d);
      } else {
        factor = Vector::Zero(d);
        factor(0) = 1.0;
      }
      branch = kron_vec(branch, factor);
    }
    acc += branch;
  }
  // Branches are mutually orthogonal (they differ in the parity of at least
  // one mode), so the sum of N unit branches has norm sqrt(N).
  return acc / std::sqrt(double(spec.n_pairs));
}

}  // namespace

Vector w_state(const WStateSpec& spec, const HilbertLayout& cavity_layout) {
  return w_state_impl(spec, cavity_layout, spec.target);
}

Vector ideal_target(const WStateSpec& spec, const HilbertLayout& cavity_layout) {
  return w_state_impl(spec, cavity_layout, WTarget::EvenModes);
}

Vector dressed_plus() {
  Vector v(3);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  return v;
}

}  // namespace catw
