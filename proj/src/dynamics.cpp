#include "catw/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>

#include "catw/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace catw {

std::string method_name(Method m) {
  switch (m) {
    case Method::ClosedRk4: return "closed-rk4";
    case Method::LindbladRk4: return "lindblad-rk4";
    case Method::Trajectories: return "trajectories";
  }
  return "unknown";
}

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, long index) {
  std::uint64_t s = seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(index + 1);
  splitmix64(s);
  return splitmix64(s);
}

double row_sum_bound(const SparseMatrix& h) {
  double mx = 0.0;
  for (long r = 0; r < h.rows(); ++r) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(h, r); it; ++it) s += std::abs(it.value());
    mx = std::max(mx, s);
  }
  return mx;
}

void stability_check(TimeDependentH& h, const SolverConfig& cfg, SimulationResult& res) {
  const double scale = row_sum_bound(h.eval(0.0));
  if (cfg.dt * scale > 0.05)
    res.warnings.push_back("dt * |H| = " + std::to_string(cfg.dt * scale) +
                           " exceeds the 0.05 accuracy heuristic; consider a smaller step");
}

void validate_common(const TimeDependentH& h, const QuantumState& s0,
                     const SolverConfig& cfg, const Observer* obs) {
  if (s0.layout() != h.layout()) throw LayoutError("state and Hamiltonian layouts differ");
  if (cfg.dt <= 0.0) throw ValidationError("solver step dt must be positive");
  if (cfg.n_steps < 0) throw ValidationError("negative step count");
  if (cfg.sample_stride < 1) throw ValidationError("sample stride must be >= 1");
  if (obs && obs->layout() != h.layout()) throw LayoutError("observer layout mismatch");
}

bool sample_due(long completed, const SolverConfig& cfg) {
  return completed % cfg.sample_stride == 0 || completed == cfg.n_steps;
}

// out = -i * H(t) * x
void apply_minus_i_h(TimeDependentH& h, double t, const Vector& x, Vector& out) {
  kernels::spmv(kernels::view(h.eval(t)), x.data(), out.data());
  Complex* o = out.data();
  const long n = out.size();
  for (long i = 0; i < n; ++i) o[i] = Complex(o[i].imag(), -o[i].real());
}

// Estimates the smallest eigenvalue of a density matrix by power iteration
// on I - rho (every eigenvalue of rho lies well below 1, so the dominant
// eigenvector of I - rho is rho's bottom one). Warm-started across sample
// times; the returned Rayleigh quotient is an upper bound that converges
// onto the true minimum.
class MinEigEstimator {
 public:
  void reset(long n) {
    v_.resize(n);
    std::uint64_t s = 0x6d696e2d65696721ull;  // fixed: estimator is deterministic
    for (long i = 0; i < n; ++i) {
      const double re = static_cast<double>(splitmix64(s)) / 1.8446744073709552e19 - 0.5;
      const double im = static_cast<double>(splitmix64(s)) / 1.8446744073709552e19 - 0.5;
      v_[i] = Complex(re, im);
    }
    v_ /= std::sqrt(kernels::norm2(v_));
  }

  double estimate(const Matrix& rho, int iters) {
    if (v_.size() != rho.rows()) reset(rho.rows());
    Vector w(v_.size());
    for (int it = 0; it < iters; ++it) {
      w.noalias() = rho * v_;
      w = v_ - w;
      const double n2 = kernels::norm2(w);
      if (n2 <= 0.0) break;
      v_ = w / std::sqrt(n2);
    }
    return kernels::quad_form(v_, rho).real();
  }

 private:
  Vector v_;
};

struct ChannelSet {
  std::vector<kernels::ShiftChannel> fused;
  std::vector<double> rates;
  Eigen::VectorXd half_decay;  // sum_c rate_c/2 * diag(L_c^dag L_c)
  bool all_fusable = true;
};

ChannelSet prepare_channels(const CollapseSet& collapse, const HilbertLayout& layout) {
  ChannelSet cs;
  cs.half_decay = Eigen::VectorXd::Zero(layout.dim());
  for (const auto& ch : collapse.channels) {
    if (ch.rate < 0.0) throw ValidationError("negative collapse rate: " + ch.name);
    if (ch.op.layout() != layout) throw LayoutError("collapse operator layout mismatch: " + ch.name);
    if (ch.rate == 0.0) continue;
    if (!kernels::ShiftChannel::eligible(ch.op.matrix())) {
      cs.all_fusable = false;
      continue;
    }
    cs.fused.push_back(kernels::ShiftChannel::from_sparse(ch.op.matrix()));
    cs.rates.push_back(ch.rate);
    const auto& f = cs.fused.back();
    for (size_t k = 0; k < f.rows.size(); ++k)
      cs.half_decay[f.src[k]] += 0.5 * ch.rate * std::norm(f.val[k]);
  }
  return cs;
}

}  // namespace

Observer::Observer(HilbertLayout layout, Vector target_modes_ket)
    : layout_(std::move(layout)), target_(std::move(target_modes_ket)) {
  if (!layout_.has_qutrit())
    throw LayoutError("observer needs the qutrit-bearing layout");
  block_ = layout_.dim() / 3;
  if (target_.size() != block_)
    throw LayoutError("target ket does not match the mode-space dimension");
  for (int j = 0; j < layout_.n_pairs(); ++j) {
    Eigen::VectorXd d(layout_.dim());
    const int so = layout_.mode_subsystem(2 * j);
    const int se = layout_.mode_subsystem(2 * j + 1);
    for (long i = 0; i < layout_.dim(); ++i) {
      const auto occ = layout_.unflatten(i);
      d[i] = occ[so] + occ[se];
    }
    pair_diag_.push_back(std::move(d));
  }
}

SampleRow Observer::sample(double t, const Vector& psi) const {
  SampleRow r;
  r.t = t;
  r.trace = kernels::norm2(psi);
  double fid = 0.0;
  const Complex* tp = target_.data();
  for (int q = 0; q < 3; ++q) {
    const Complex* block = psi.data() + q * block_;
    Complex ov = 0.0;
    double pop = 0.0;
    for (long i = 0; i < block_; ++i) {
      ov += std::conj(tp[i]) * block[i];
      pop += std::norm(block[i]);
    }
    fid += std::norm(ov);
    (q == kG ? r.pop_g : q == kE ? r.pop_e : r.pop_f) = pop;
  }
  r.fidelity_sq = fid;
  for (const auto& d : pair_diag_) r.pair_n.push_back(kernels::diag_expectation(d, psi));
  return r;
}

SampleRow Observer::sample(double t, const Matrix& rho) const {
  SampleRow r;
  r.t = t;
  r.trace = kernels::trace(rho).real();
  double fid = 0.0;
  const Complex* tp = target_.data();
  for (int q = 0; q < 3; ++q) {
    const long off = q * block_;
    Complex quad = 0.0;
    double pop = 0.0;
    for (long j = 0; j < block_; ++j) {
      const Complex* col = rho.col(off + j).data() + off;
      Complex acc = 0.0;
      for (long i = 0; i < block_; ++i) acc += std::conj(tp[i]) * col[i];
      quad += acc * tp[j];
      pop += col[j].real();
    }
    fid += quad.real();
    (q == kG ? r.pop_g : q == kE ? r.pop_e : r.pop_f) = pop;
  }
  r.fidelity_sq = fid;
  for (const auto& d : pair_diag_) r.pair_n.push_back(kernels::diag_expectation(d, rho));
  return r;
}

SimulationResult evolve_closed(TimeDependentH& h, const QuantumState& state0,
                               const SolverConfig& cfg, const Observer* obs) {
  if (!state0.is_ket()) throw ValidationError("evolve_closed needs a ket state");
  validate_common(h, state0, cfg, obs);
  h.finalize();

  SimulationResult res;
  res.dt = cfg.dt;
  res.n_steps = cfg.n_steps;
  stability_check(h, cfg, res);

  Vector psi = state0.vec();
  const long n = psi.size();
  Vector k1(n), k2(n), k3(n), k4(n), tmp(n);

  if (obs) res.rows.push_back(obs->sample(0.0, psi));
  for (long s = 0; s < cfg.n_steps; ++s) {
    const double t = s * cfg.dt;
    apply_minus_i_h(h, t, psi, k1);
    kernels::add_scaled(psi, 0.5 * cfg.dt, k1, tmp);
    apply_minus_i_h(h, t + 0.5 * cfg.dt, tmp, k2);
    kernels::add_scaled(psi, 0.5 * cfg.dt, k2, tmp);
    apply_minus_i_h(h, t + 0.5 * cfg.dt, tmp, k3);
    kernels::add_scaled(psi, cfg.dt, k3, tmp);
    apply_minus_i_h(h, t + cfg.dt, tmp, k4);
    kernels::rk4_combine(cfg.dt, k1, k2, k3, k4, psi);

    const double drift = std::abs(kernels::norm2(psi) - 1.0);
    res.max_norm_drift = std::max(res.max_norm_drift, drift);
    if (!(drift <= cfg.norm_tol))
      throw SolverError("norm drift " + std::to_string(drift) + " at t = " +
                        std::to_string((s + 1) * cfg.dt) +
                        " s exceeds norm_tol; reduce dt");
    if (obs && sample_due(s + 1, cfg)) res.rows.push_back(obs->sample((s + 1) * cfg.dt, psi));
  }
  res.final_psi = std::move(psi);
  return res;
}

SimulationResult evolve_lindblad(TimeDependentH& h, const CollapseSet& collapse,
                                 const QuantumState& state0, const SolverConfig& cfg,
                                 const Observer* obs) {
  validate_common(h, state0, cfg, obs);
  const long n = h.dim();
  if (n > 4096)
    throw ResourceError("dense density-matrix evolution is limited to dimension 4096, got " +
                        std::to_string(n) + "; use evolve_trajectories or lower the cutoff");
  h.finalize();

  SimulationResult res;
  res.dt = cfg.dt;
  res.n_steps = cfg.n_steps;
  stability_check(h, cfg, res);

  ChannelSet cs = prepare_channels(collapse, h.layout());
  std::vector<SparseMatrix> slow_ops;
  std::vector<double> slow_rates;
  if (!cs.all_fusable) {
    // Fall back to the plain reference right-hand side; correctness over speed.
    res.warnings.push_back("collapse set not fusable; using reference Lindblad kernels");
    for (const auto& ch : collapse.channels)
      if (ch.rate > 0.0) {
        slow_ops.push_back(ch.op.matrix());
        slow_rates.push_back(ch.rate);
      }
  }

  Matrix rho = state0.to_density();
  Matrix v(n, n), k1(n, n), k2(n, n), k3(n, n), k4(n, n), tmp(n, n);

  auto rhs = [&](double t, const Matrix& x, Matrix& k) {
    if (!cs.all_fusable) {
      k = kernels::ref::lindblad_rhs(h.eval(t), slow_ops, slow_rates, x);
      return;
    }
    kernels::spmm_adjoint_right(kernels::view(h.eval(t)), x, v);  // v = x H^dag = (H x)^dag
    kernels::set_minus_i_commutator(v, -1.0, k);
    for (size_t c = 0; c < cs.fused.size(); ++c)
      kernels::accum_jump(cs.fused[c], cs.rates[c], x, k);
    kernels::accum_diag_anticommutator(cs.half_decay, x, k);
  };

  MinEigEstimator min_eig;
  double min_eig_floor = std::numeric_limits<double>::infinity();
  auto diagnose = [&](double t) {
    res.max_herm_defect = std::max(res.max_herm_defect, kernels::herm_defect(rho));
    if (cfg.estimate_min_eig) {
      const double e = min_eig.estimate(rho, cfg.min_eig_iters);
      min_eig_floor = std::min(min_eig_floor, e);
      if (e < -1e-6)
        res.warnings.push_back("positivity: eigenvalue estimate " + std::to_string(e) +
                               " at t = " + std::to_string(t) + " s");
    }
  };

  diagnose(0.0);
  if (obs) res.rows.push_back(obs->sample(0.0, rho));
  for (long s = 0; s < cfg.n_steps; ++s) {
    const double t = s * cfg.dt;
    rhs(t, rho, k1);
    kernels::add_scaled(rho, 0.5 * cfg.dt, k1, tmp);
    rhs(t + 0.5 * cfg.dt, tmp, k2);
    kernels::add_scaled(rho, 0.5 * cfg.dt, k2, tmp);
    rhs(t + 0.5 * cfg.dt, tmp, k3);
    kernels::add_scaled(rho, cfg.dt, k3, tmp);
    rhs(t + cfg.dt, tmp, k4);
    kernels::rk4_combine(cfg.dt, k1, k2, k3, k4, rho);

    const double drift = std::abs(kernels::trace(rho).real() - 1.0);
    res.max_trace_drift = std::max(res.max_trace_drift, drift);
    if (!(drift <= cfg.trace_tol))
      throw SolverError("trace drift " + std::to_string(drift) + " at t = " +
                        std::to_string((s + 1) * cfg.dt) + " s exceeds trace_tol; reduce dt");
    if (sample_due(s + 1, cfg)) {
      diagnose((s + 1) * cfg.dt);
      if (obs) res.rows.push_back(obs->sample((s + 1) * cfg.dt, rho));
    }
  }
  res.min_eig_estimate = std::isfinite(min_eig_floor) ? min_eig_floor : 0.0;
  res.final_rho = std::move(rho);
  return res;
}

SimulationResult evolve_trajectories(const TimeDependentH& h, const CollapseSet& collapse,
                                     const QuantumState& state0, const SolverConfig& cfg,
                                     const Observer* obs) {
  if (!state0.is_ket()) throw ValidationError("evolve_trajectories needs a ket state");
  validate_common(h, state0, cfg, obs);
  if (cfg.n_trajectories < 1) throw ValidationError("trajectory count must be >= 1");

  const long n = h.layout().dim();
  const long nt = cfg.n_trajectories;

  // Channel machinery: sparse operators for jumps plus the diagonal-free
  // general drift operator K = sum_c rate_c/2 L_c^dag L_c.
  std::vector<SparseMatrix> ops;
  std::vector<double> rates;
  SparseMatrix k_half(n, n);
  for (const auto& ch : collapse.channels) {
    if (ch.rate < 0.0) throw ValidationError("negative collapse rate: " + ch.name);
    if (ch.op.layout() != h.layout())
      throw LayoutError("collapse operator layout mismatch: " + ch.name);
    if (ch.rate == 0.0) continue;
    ops.push_back(ch.op.matrix());
    rates.push_back(ch.rate);
    k_half += SparseMatrix(Complex(0.5 * ch.rate) *
                           (SparseMatrix(ch.op.matrix().adjoint()) * ch.op.matrix()));
  }
  k_half.makeCompressed();
  const size_t nch = ops.size();

  std::vector<std::vector<SampleRow>> all_rows(obs ? nt : 0);
  std::vector<std::vector<long>> all_jumps(nt, std::vector<long>(nch, 0));

  SimulationResult res;
  res.dt = cfg.dt;
  res.n_steps = cfg.n_steps;
  {
    TimeDependentH probe = h;
    probe.finalize();
    stability_check(probe, cfg, res);
  }

  bool par = false;
#ifdef _OPENMP
  par = !omp_in_parallel();
#endif

  // Exceptions may not cross the parallel region; the first one is captured
  // and rethrown after the join.
  std::atomic<bool> failed{false};
  std::string failure;

#pragma omp parallel if (par)
  {
    TimeDependentH hl = h;
    hl.finalize();
    Vector psi(n), k1(n), k2(n), k3(n), k4(n), tmp(n), scratch(n);

    auto drift = [&](double t, const Vector& x, Vector& out) {
      apply_minus_i_h(hl, t, x, out);
      if (nch > 0) {
        kernels::spmv(kernels::view(k_half), x.data(), scratch.data());
        for (long i = 0; i < n; ++i) out[i] -= scratch[i];
      }
    };

#pragma omp for schedule(dynamic)
    for (long tr = 0; tr < nt; ++tr) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        std::mt19937_64 eng(stream_seed(cfg.seed, tr));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        psi = state0.vec();
        double threshold = uni(eng);

        auto record = [&](long completed) {
          if (!obs || !sample_due(completed, cfg)) return;
          const double n2 = kernels::norm2(psi);
          tmp = psi / std::sqrt(n2);
          all_rows[tr].push_back(obs->sample(completed * cfg.dt, tmp));
        };

        record(0);
        for (long s = 0; s < cfg.n_steps; ++s) {
          const double t = s * cfg.dt;
          drift(t, psi, k1);
          kernels::add_scaled(psi, 0.5 * cfg.dt, k1, tmp);
          drift(t + 0.5 * cfg.dt, tmp, k2);
          kernels::add_scaled(psi, 0.5 * cfg.dt, k2, tmp);
          drift(t + 0.5 * cfg.dt, tmp, k3);
          kernels::add_scaled(psi, cfg.dt, k3, tmp);
          drift(t + cfg.dt, tmp, k4);
          kernels::rk4_combine(cfg.dt, k1, k2, k3, k4, psi);

          const double n2 = kernels::norm2(psi);
          if (!std::isfinite(n2) || n2 > 1.0 + 1e-3)
            throw SolverError("trajectory norm grew to " + std::to_string(n2) +
                              "; the drift integration is unstable, reduce dt");
          if (n2 < threshold) {
            // Collapse: channel weight rate * ||L psi||^2, then renormalize.
            double total = 0.0;
            std::vector<double> w(nch);
            for (size_t c = 0; c < nch; ++c) {
              kernels::spmv(kernels::view(ops[c]), psi.data(), scratch.data());
              w[c] = rates[c] * kernels::norm2(scratch);
              total += w[c];
            }
            if (total > 0.0) {
              const double pick = uni(eng) * total;
              double cum = 0.0;
              size_t chosen = nch - 1;
              for (size_t c = 0; c < nch; ++c) {
                cum += w[c];
                if (pick < cum) {
                  chosen = c;
                  break;
                }
              }
              kernels::spmv(kernels::view(ops[chosen]), psi.data(), scratch.data());
              psi = scratch / std::sqrt(kernels::norm2(scratch));
              all_jumps[tr][chosen] += 1;
              threshold = uni(eng);
            }
          }
          record(s + 1);
        }
      } catch (const std::exception& e) {
#pragma omp critical(catw_traj_failure)
        {
          if (!failed.load(std::memory_order_relaxed)) {
            failure = e.what();
            failed.store(true, std::memory_order_relaxed);
          }
        }
      }
    }
  }
  if (failed.load()) throw SolverError(failure);

  // Ensemble average, reduced in trajectory order so the result does not
  // depend on the scheduling of the loop above.
  if (obs) {
    res.rows = all_rows[0];
    for (long tr = 1; tr < nt; ++tr) {
      const auto& rows = all_rows[tr];
      for (size_t i = 0; i < res.rows.size(); ++i) {
        res.rows[i].fidelity_sq += rows[i].fidelity_sq;
        res.rows[i].trace += rows[i].trace;
        res.rows[i].pop_g += rows[i].pop_g;
        res.rows[i].pop_e += rows[i].pop_e;
        res.rows[i].pop_f += rows[i].pop_f;
        for (size_t p = 0; p < res.rows[i].pair_n.size(); ++p)
          res.rows[i].pair_n[p] += rows[i].pair_n[p];
      }
    }
    const double inv = 1.0 / static_cast<double>(nt);
    for (auto& row : res.rows) {
      row.fidelity_sq *= inv;
      row.trace *= inv;
      row.pop_g *= inv;
      row.pop_e *= inv;
      row.pop_f *= inv;
      for (auto& pn : row.pair_n) pn *= inv;
    }
  }
  res.jump_counts.assign(nch, 0);
  for (long tr = 0; tr < nt; ++tr)
    for (size_t c = 0; c < nch; ++c) res.jump_counts[c] += all_jumps[tr][c];
  return res;
}

}  // namespace catw
