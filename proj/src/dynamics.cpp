#include "zeno/dynamics.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace zeno {

namespace {

using SparseC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

SparseC to_sparse(const CMatrix& m) { return m.sparseView(0.0, 0.0); }

std::vector<double> boundaries(const PulseSchedule& schedule) {
  std::vector<double> b{0.0};
  for (const auto& s : schedule.segments) b.push_back(b.back() + s.duration);
  return b;
}

void check_truncation(double top, double limit, double t) {
  if (top >= limit) {
    throw TruncationError("Fock truncation overflow: top-level population " + std::to_string(top) + " at t=" +
                          std::to_string(t) + " s (raise n_fock)");
  }
}

class LindbladRhs {
 public:
  LindbladRhs(const CMatrix& h, const std::vector<OperatorMatrix>& jumps) {
    CMatrix heff = h;
    for (const auto& l : jumps) {
      heff -= cplx(0.0, 0.5) * (l.matrix.adjoint() * l.matrix);
      ops_.push_back(to_sparse(l.matrix));
      adj_.push_back(to_sparse(l.matrix.adjoint()));
    }
    // -i Heff precomputed
    minus_i_heff_ = to_sparse(cplx(0.0, -1.0) * heff);
  }

  void operator()(const CMatrix& r, CMatrix& out, CMatrix& tmp) const {
    tmp.noalias() = minus_i_heff_ * r;
    out = tmp + tmp.adjoint();
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      tmp.noalias() = ops_[k] * r;
      out.noalias() += tmp * adj_[k];
    }
  }

 private:
  SparseC minus_i_heff_;
  std::vector<SparseC> ops_;
  std::vector<SparseC> adj_;
};

struct Rk4Work {
  CMatrix k1, k2, k3, k4, tmp, stage;
  explicit Rk4Work(Eigen::Index d)
      : k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d), stage(d, d) {}
};

void rk4_steps(const LindbladRhs& f, CMatrix& rho, double dt, long n, Rk4Work& w) {
  for (long s = 0; s < n; ++s) {
    f(rho, w.k1, w.tmp);
    w.stage = rho + (0.5 * dt) * w.k1;
    f(w.stage, w.k2, w.tmp);
    w.stage = rho + (0.5 * dt) * w.k2;
    f(w.stage, w.k3, w.tmp);
    w.stage = rho + dt * w.k3;
    f(w.stage, w.k4, w.tmp);
    rho += (dt / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
  }
}

void check_density(const CMatrix& rho, const LindbladOptions& opts, double t) {
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > opts.trace_tol)
    throw NumericalError("trace drifted to " + std::to_string(tr) + " at t=" + std::to_string(t));
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-9) throw NumericalError("density matrix lost Hermiticity (" + std::to_string(herm) + ")");
  CMatrix shifted = rho;
  shifted.diagonal().array() -= opts.positivity_floor;
  Eigen::LLT<CMatrix> llt(shifted);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    throw NumericalError("positivity violated: eigenvalue " + std::to_string(es.eigenvalues().minCoeff()) +
                         " at t=" + std::to_string(t));
  }
}

}  // namespace

SegmentPropagator::SegmentPropagator(const CMatrix& hamiltonian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hamiltonian);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  energies_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
}

CVector SegmentPropagator::apply(const CVector& psi, double t) const {
  CVector c = vectors_.adjoint() * psi;
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::polar(1.0, -energies_(i) * t);
  return vectors_ * c;
}

CMatrix SegmentPropagator::unitary(double t) const {
  CVector phases(energies_.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -energies_(i) * t);
  return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

double SegmentPropagator::max_abs_eigenvalue() const { return energies_.cwiseAbs().maxCoeff(); }

std::vector<double> sample_times(const PulseSchedule& schedule, double sample_dt) {
  if (sample_dt < 0.0 || !std::isfinite(sample_dt)) throw std::invalid_argument("sample_dt must be > 0");
  const double total = schedule.total_duration();
  // (time, is_boundary); boundary values win when a grid point lands on one
  std::vector<std::pair<double, bool>> ts;
  for (double b : boundaries(schedule)) ts.emplace_back(b, true);
  if (total > 0.0) {
    const double dt = sample_dt > 0.0 ? sample_dt : total / 400.0;
    const long n = static_cast<long>(std::floor(total / dt + 1e-9));
    for (long i = 1; i <= n; ++i) ts.emplace_back(std::min(total, i * dt), false);
  }
  std::sort(ts.begin(), ts.end());
  const double eps = 1e-12 * std::max(total, 1e-300);
  std::vector<double> out;
  std::vector<bool> fixed;
  for (const auto& [t, is_boundary] : ts) {
    if (!out.empty() && t - out.back() <= eps) {
      if (is_boundary && !fixed.back()) {
        out.back() = t;
        fixed.back() = true;
      }
      continue;
    }
    out.push_back(t);
    fixed.push_back(is_boundary);
  }
  return out;
}

void evolve_pure(const PulseSchedule& schedule, const SystemDims& dims, const IonGeometry& geom,
                 const PureState& initial, const EvolveOptions& opts, const PureObserver& observer) {
  schedule.validate();
  if (opts.sample_dt < 0.0) throw std::invalid_argument("sample_dt must be > 0");
  if (!(initial.dims == dims)) throw std::invalid_argument("initial state dims mismatch");
  try {
    check_state(initial);
  } catch (const NumericalError& e) {
    throw std::invalid_argument(std::string("initial state: ") + e.what());
  }

  std::vector<SegmentPropagator> props;
  props.reserve(schedule.segments.size());
  for (const auto& seg : schedule.segments)
    props.emplace_back(segment_hamiltonian(dims, geom, seg, opts.stark_shifts).matrix);

  const std::vector<double> bounds = boundaries(schedule);
  const std::vector<double> ts = sample_times(schedule, opts.sample_dt);
  const double eps = 1e-12 * std::max(schedule.total_duration(), 1e-300);
  const bool has_mode = dims.n_fock > 1;

  std::size_t k = 0;
  CVector start = initial.amplitudes;
  PureState psi{dims, {}};
  for (double t : ts) {
    while (k < props.size() && t > bounds[k + 1] + eps) {
      start = props[k].apply(start, schedule.segments[k].duration);
      ++k;
    }
    psi.amplitudes = k < props.size() ? props[k].apply(start, std::min(t, bounds[k + 1]) - bounds[k]) : start;
    const double norm = psi.amplitudes.norm();
    if (std::abs(norm - 1.0) > 1e-9) throw NumericalError("norm drifted to " + std::to_string(norm));
    if (has_mode) check_truncation(top_fock_population(psi), opts.truncation_limit, t);
    observer(t, psi);
  }
}

PureTrajectory evolve_pure(const PulseSchedule& schedule, const SystemDims& dims, const IonGeometry& geom,
                           const PureState& initial, const EvolveOptions& opts) {
  PureTrajectory traj;
  traj.schedule = schedule;
  evolve_pure(schedule, dims, geom, initial, opts, [&](double t, const PureState& psi) {
    traj.times.push_back(t);
    traj.states.push_back(psi);
  });
  return traj;
}

PureState propagate_pure(const PulseSchedule& schedule, const SystemDims& dims, const IonGeometry& geom,
                         const PureState& initial, const std::vector<double>& stark_shifts) {
  schedule.validate();
  if (!(initial.dims == dims)) throw std::invalid_argument("initial state dims mismatch");
  PureState psi = initial;
  for (const auto& seg : schedule.segments) {
    SegmentPropagator p(segment_hamiltonian(dims, geom, seg, stark_shifts).matrix);
    psi.amplitudes = p.apply(psi.amplitudes, seg.duration);
  }
  return psi;
}

LindbladStats evolve_density(const PulseSchedule& schedule, const SystemDims& dims, const IonGeometry& geom,
                             const NoiseModel& noise, const DensityOperator& initial, const LindbladOptions& opts,
                             const DensityObserver& observer) {
  schedule.validate();
  noise.validate();
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (!(initial.dims == dims)) throw std::invalid_argument("initial state dims mismatch");
  try {
    check_state(initial);
  } catch (const NumericalError& e) {
    throw std::invalid_argument(std::string("initial state: ") + e.what());
  }

  const std::vector<OperatorMatrix> jumps = lindblad_operators(dims, noise);
  std::vector<LindbladRhs> rhs;
  double omega_max = 0.0;
  double tau_min = std::numeric_limits<double>::infinity();
  for (const auto& seg : schedule.segments) {
    const CMatrix h = segment_hamiltonian(dims, geom, seg, noise.stark_shifts).matrix;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    omega_max = std::max(omega_max, es.eigenvalues().cwiseAbs().maxCoeff());
    tau_min = std::min(tau_min, seg.duration);
    rhs.emplace_back(h, jumps);
  }

  LindbladStats stats;
  double h = tau_min / 20.0;
  if (omega_max > 0.0) h = std::min(h, kTwoPi / (50.0 * omega_max));
  stats.initial_step = h;

  const std::vector<double> bounds = boundaries(schedule);
  const std::vector<double> ts = sample_times(schedule, opts.sample_dt);
  const double eps = 1e-12 * std::max(schedule.total_duration(), 1e-300);
  const bool has_mode = dims.n_fock > 1;
  const Eigen::Index d = dims.dim();

  DensityOperator state = initial;
  CMatrix coarse(d, d);
  Rk4Work work(d);
  std::size_t k = 0;

  auto emit = [&](double t) {
    check_density(state.matrix, opts, t);
    if (has_mode) check_truncation(top_fock_population(state), opts.truncation_limit, t);
    observer(t, state);
  };

  emit(ts.front());
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double ta = ts[i - 1];
    const double tb = ts[i];
    while (k + 1 < rhs.size() && ta >= bounds[k + 1] - eps) ++k;
    const double len = tb - ta;
    for (;;) {
      const long n = std::max(1L, static_cast<long>(std::ceil(len / h - 1e-9)));
      const double dt = len / static_cast<double>(n);
      coarse = state.matrix;
      rk4_steps(rhs[k], coarse, dt, n, work);
      CMatrix fine = state.matrix;
      rk4_steps(rhs[k], fine, 0.5 * dt, 2 * n, work);
      const double diff = (fine - coarse).cwiseAbs().maxCoeff();
      if (diff <= opts.tol) {
        stats.max_discrepancy = std::max(stats.max_discrepancy, diff);
        stats.steps += 3 * n;
        state.matrix = std::move(fine);
        break;
      }
      if (++stats.halvings > opts.max_halvings) {
        throw ConvergenceError("step halving failed to reach tol " + std::to_string(opts.tol) +
                               " (discrepancy " + std::to_string(diff) + ")");
      }
      h *= 0.5;
    }
    emit(tb);
  }
  stats.final_step = h;
  return stats;
}

DensityTrajectory evolve_density(const PulseSchedule& schedule, const SystemDims& dims, const IonGeometry& geom,
                                 const NoiseModel& noise, const DensityOperator& initial,
                                 const LindbladOptions& opts) {
  DensityTrajectory traj;
  traj.schedule = schedule;
  evolve_density(schedule, dims, geom, noise, initial, opts, [&](double t, const DensityOperator& rho) {
    traj.times.push_back(t);
    traj.states.push_back(rho);
  });
  return traj;
}

PopulationTarget named_target(const SystemDims& dims, NamedState name, std::optional<int> fock) {
  return {std::string(to_string(name)), spin_state(dims, name), fock};
}

PopulationSample measure_spin(const SystemDims& dims, const CMatrix& rho_spin,
                              const std::vector<PopulationTarget>& targets) {
  PopulationSample out;
  out.p_up.assign(dims.n_ions + 1, 0.0);
  for (int s = 0; s < dims.spin_dim(); ++s) {
    const int k = dims.up_count(s);
    const double p = rho_spin(s, s).real();
    if (k < 0)
      out.leakage += p;
    else
      out.p_up[k] += p;
  }
  for (const auto& tg : targets) {
    if (tg.fock) throw std::invalid_argument("target '" + tg.name + "' needs the motional state");
    out.targets.push_back(tg.spin.dot(rho_spin * tg.spin).real());
  }
  return out;
}

PopulationSample measure(const DensityOperator& rho, const std::vector<PopulationTarget>& targets) {
  const SystemDims& d = rho.dims;
  std::vector<PopulationTarget> traced;
  for (const auto& tg : targets) traced.push_back({tg.name, tg.spin, std::nullopt});
  PopulationSample out = measure_spin(d, reduce_to_spin(rho), traced);
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const auto& tg = targets[j];
    if (tg.spin.size() != d.spin_dim()) throw std::invalid_argument("target '" + tg.name + "' has wrong dimension");
    if (!tg.fock) continue;
    if (*tg.fock < 0 || *tg.fock >= d.n_fock) throw std::out_of_range("target Fock level out of range");
    cplx acc{};
    for (int a = 0; a < d.spin_dim(); ++a)
      for (int b = 0; b < d.spin_dim(); ++b)
        acc += std::conj(tg.spin(a)) * tg.spin(b) * rho.matrix(d.index(a, *tg.fock), d.index(b, *tg.fock));
    out.targets[j] = acc.real();
  }
  return out;
}

PopulationSample measure(const PureState& psi, const std::vector<PopulationTarget>& targets) {
  const SystemDims& d = psi.dims;
  std::vector<PopulationTarget> traced;
  for (const auto& tg : targets) traced.push_back({tg.name, tg.spin, std::nullopt});
  PopulationSample out = measure_spin(d, reduce_to_spin(psi), traced);
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const auto& tg = targets[j];
    if (tg.spin.size() != d.spin_dim()) throw std::invalid_argument("target '" + tg.name + "' has wrong dimension");
    if (!tg.fock) continue;
    if (*tg.fock < 0 || *tg.fock >= d.n_fock) throw std::out_of_range("target Fock level out of range");
    cplx amp{};
    for (int a = 0; a < d.spin_dim(); ++a) amp += std::conj(tg.spin(a)) * psi.amplitudes(d.index(a, *tg.fock));
    out.targets[j] = std::norm(amp);
  }
  return out;
}

namespace {

template <class Traj>
PopulationRecord extract(const Traj& traj, const std::vector<PopulationTarget>& targets) {
  PopulationRecord rec;
  rec.times = traj.times;
  for (const auto& tg : targets) rec.target_names.push_back(tg.name);
  for (const auto& s : traj.states) rec.samples.push_back(measure(s, targets));
  return rec;
}

}  // namespace

PopulationRecord extract_populations(const PureTrajectory& traj, const std::vector<PopulationTarget>& targets) {
  return extract(traj, targets);
}

PopulationRecord extract_populations(const DensityTrajectory& traj, const std::vector<PopulationTarget>& targets) {
  return extract(traj, targets);
}

}  // namespace zeno
