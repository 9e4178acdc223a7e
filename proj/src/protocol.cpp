#include "zeno/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "zeno/dressed.hpp"

namespace zeno {

namespace {

// Outer-ion shift (rad/s) reproducing the 0.023 differential Stark entry of the
// three-ion budget under the static sigma_z model.
constexpr double kThreeIonStarkShift = khz(0.7008);
// Rate multiplier on the inverted three-ion spontaneous preset so the simulated peak
// deficit (rather than 1 - exp(-Gamma_bar t_pi)) equals 0.010.
constexpr double kThreeIonSpontaneousScale = 1.0664;

void check_rate(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

}  // namespace

void ProtocolPlan::validate() const {
  if (n_ions != 2 && n_ions != 3) throw std::invalid_argument("plan: n_ions must be 2 or 3");
  if (omega_s == 0.0 || !std::isfinite(omega_s)) throw std::invalid_argument("plan: omega_s must be nonzero");
  check_rate(omega_d, "plan: omega_d");
  check_rate(t_pi, "plan: t_pi");
  if (scheme == Scheme::composite) {
    if (n_ions != 2) throw std::invalid_argument("plan: composite scheme is two-ion only");
    check_rate(t1, "plan: t1");
    check_rate(t2, "plan: t2");
  }
  if (m < 0) throw std::invalid_argument("plan: m must be >= 0");
}

double effective_pi_time(int n_ions, double omega_d) {
  check_rate(omega_d, "omega_d");
  return kPi / (2.0 * std::sqrt(static_cast<double>(n_ions)) * omega_d);
}

ProtocolPlan plan_single(double omega_s, int m) {
  if (m < 0) throw std::invalid_argument("single pulse needs m >= 0");
  if (omega_s == 0.0) throw std::invalid_argument("omega_s must be nonzero");
  ProtocolPlan p;
  p.scheme = Scheme::single;
  p.m = m;
  p.n_ions = 2;
  p.omega_s = omega_s;
  p.delta = optimal_detuning(omega_s);
  const double delta1 = 2.0 / std::sqrt(3.0) * std::abs(omega_s);
  return with_omega_d(p, delta1 / (std::sqrt(2.0) * (4 * m + 1)));
}

ProtocolPlan plan_composite(double omega_s, int m) {
  if (m < 1) throw std::invalid_argument("composite pulse needs m >= 1");
  if (omega_s == 0.0) throw std::invalid_argument("omega_s must be nonzero");
  ProtocolPlan p;
  p.scheme = Scheme::composite;
  p.m = m;
  p.n_ions = 2;
  p.omega_s = omega_s;
  p.delta = optimal_detuning(omega_s);
  return with_omega_d(p, std::abs(omega_s) / (3.0 * std::sqrt(6.0) * m));
}

ProtocolPlan plan_three_ion(double omega_s, double omega_d) {
  if (omega_s == 0.0) throw std::invalid_argument("omega_s must be nonzero");
  ProtocolPlan p;
  p.scheme = Scheme::single;
  p.n_ions = 3;
  p.omega_s = omega_s;
  p.delta = 0.0;
  return with_omega_d(p, omega_d);
}

ProtocolPlan with_omega_d(ProtocolPlan plan, double omega_d) {
  plan.omega_d = omega_d;
  plan.t_pi = effective_pi_time(plan.n_ions, omega_d);
  if (plan.scheme == Scheme::composite) {
    plan.t1 = plan.t_pi / 3.0;
    plan.t2 = 2.0 * plan.t_pi / 3.0;
  } else {
    plan.t1 = plan.t_pi;
    plan.t2 = 0.0;
  }
  return plan;
}

PulseSchedule make_schedule(const ProtocolPlan& plan, double stretch) {
  plan.validate();
  if (!(stretch >= 1.0)) throw std::invalid_argument("schedule stretch must be >= 1");
  PulseSchedule s;
  PulseSegment seg;
  seg.omega_s = plan.omega_s;
  seg.omega_d = plan.omega_d;
  seg.delta = plan.delta;
  if (plan.scheme == Scheme::single) {
    seg.duration = stretch * plan.t_pi;
    s.segments.push_back(seg);
    return s;
  }
  seg.duration = plan.t1;
  s.segments.push_back(seg);
  seg.duration = plan.t2 + (stretch - 1.0) * plan.t_pi;
  seg.laser_phase = kPi;
  seg.delta = -plan.delta;
  s.segments.push_back(seg);
  return s;
}

IonGeometry plan_geometry(const ProtocolPlan& plan) {
  return plan.n_ions == 2 ? IonGeometry::two_ion_stretch() : IonGeometry::three_ion_com();
}

NamedState plan_target(const ProtocolPlan& plan) { return plan.n_ions == 2 ? NamedState::T : NamedState::W; }

NamedState plan_initial(const ProtocolPlan& plan) { return plan.n_ions == 2 ? NamedState::uu : NamedState::uuu; }

NoiseModel spontaneous_preset(int n_ions, double deficit, double t) {
  if (!(deficit >= 0.0 && deficit < 1.0)) throw std::invalid_argument("deficit must be in [0, 1)");
  check_rate(t, "t");
  const double gamma_bar = -std::log1p(-deficit) / t;
  // all four rates equal to g: Gamma_all_up = Gamma_target = 2 N g
  const double g = gamma_bar / (2.0 * n_ions);
  NoiseModel n;
  n.gamma_du = n.gamma_ud = n.gamma_ou = n.gamma_od = g;
  return n;
}

namespace {

struct SimSetup {
  SystemDims dims;
  IonGeometry geom;
  PulseSchedule schedule;
  CVector initial_spin;
  PopulationTarget target;
};

SimSetup setup(const ProtocolPlan& plan, const NoiseModel& noise, const SimOptions& opts) {
  plan.validate();
  noise.validate();
  SimSetup s;
  s.dims = SystemDims{plan.n_ions, opts.n_fock, noise.needs_leak_level() && opts.leak_level};
  if (noise.needs_leak_level() && !opts.leak_level)
    throw std::invalid_argument("noise decays into |o> but the leak level is disabled");
  s.dims.validate();
  s.geom = plan_geometry(plan);
  s.schedule = make_schedule(plan, opts.peak ? opts.peak_window : 1.0);
  s.initial_spin = spin_state(s.dims, plan_initial(plan));
  s.target = named_target(s.dims, plan_target(plan));
  return s;
}

}  // namespace

SimResult simulate_fidelity(const ProtocolPlan& plan, const NoiseModel& noise, const SimOptions& opts) {
  const SimSetup s = setup(plan, noise, opts);
  const double total = s.schedule.total_duration();
  const double dt = total / std::max(1, opts.samples);
  const std::vector<PopulationTarget> targets{s.target};
  SimResult best{-1.0, 0.0};
  auto consider = [&](double t, double f) {
    if (!opts.peak) {
      best = {f, t};
    } else if (f > best.fidelity) {
      best = {f, t};
    }
  };

  if (!noise.has_dissipation()) {
    const std::vector<double> w = thermal_weights(noise.n_bar, s.dims.n_fock);
    const std::vector<double> ts = sample_times(s.schedule, dt);
    std::vector<double> fid(opts.peak ? ts.size() : 1, 0.0);
    std::vector<double> top(fid.size(), 0.0);
    EvolveOptions eo;
    eo.sample_dt = dt;
    eo.stark_shifts = noise.stark_shifts;
    eo.truncation_limit = std::numeric_limits<double>::infinity();
    for (int n = 0; n < s.dims.n_fock; ++n) {
      if (w[n] < 1e-15) continue;
      const PureState psi0 = product_state(s.dims, s.initial_spin, n);
      if (opts.peak) {
        std::size_t i = 0;
        evolve_pure(s.schedule, s.dims, s.geom, psi0, eo, [&](double, const PureState& psi) {
          fid[i] += w[n] * measure(psi, targets).targets[0];
          if (s.dims.n_fock > 1) top[i] += w[n] * top_fock_population(psi);
          ++i;
        });
      } else {
        const PureState psi = propagate_pure(s.schedule, s.dims, s.geom, psi0, noise.stark_shifts);
        fid[0] += w[n] * measure(psi, targets).targets[0];
        if (s.dims.n_fock > 1) top[0] += w[n] * top_fock_population(psi);
      }
    }
    for (std::size_t i = 0; i < fid.size(); ++i) {
      if (s.dims.n_fock > 1 && top[i] >= 1e-8)
        throw TruncationError("Fock truncation overflow: top-level population " + std::to_string(top[i]) +
                              " (raise n_fock)");
      consider(opts.peak ? ts[i] : total, fid[i]);
    }
    return best;
  }

  LindbladOptions lo;
  lo.tol = opts.lindblad_tol;
  lo.sample_dt = opts.peak ? dt : total;
  const DensityOperator rho0 = thermal_product_state(s.dims, s.initial_spin, noise.n_bar);
  evolve_density(s.schedule, s.dims, s.geom, noise, rho0, lo, [&](double t, const DensityOperator& rho) {
    if (opts.peak || t >= total * (1.0 - 1e-12)) consider(t, measure(rho, targets).targets[0]);
  });
  return best;
}

CMatrix qubit_register_state(int n_ions, bool leak_level, const CMatrix& rho_spin) {
  if (!leak_level) return rho_spin;
  // Kraus pair per ion: keep {up, down}, and |down><o|
  Eigen::MatrixXd keep = Eigen::MatrixXd::Zero(2, 3);
  keep(0, 0) = keep(1, 1) = 1.0;
  Eigen::MatrixXd fold = Eigen::MatrixXd::Zero(2, 3);
  fold(1, 2) = 1.0;
  const int q = 1 << n_ions;
  CMatrix out = CMatrix::Zero(q, q);
  for (int mask = 0; mask < q; ++mask) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Ones(1, 1);
    for (int i = 0; i < n_ions; ++i) {
      const Eigen::MatrixXd& f = ((mask >> i) & 1) ? fold : keep;
      Eigen::MatrixXd next(k.rows() * 2, k.cols() * 3);
      for (Eigen::Index a = 0; a < k.rows(); ++a)
        for (Eigen::Index b = 0; b < k.cols(); ++b) next.block(2 * a, 3 * b, 2, 3) = k(a, b) * f;
      k = std::move(next);
    }
    const CMatrix kc = k.cast<cplx>();
    out += kc * rho_spin * kc.adjoint();
  }
  return out;
}

ProtocolTrace simulate_trace(const ProtocolPlan& plan, const NoiseModel& noise, const SimOptions& opts,
                             double window) {
  if (!(window >= 1.0)) throw std::invalid_argument("trace window must be >= 1");
  SimOptions so = opts;
  so.peak = false;
  SimSetup s = setup(plan, noise, so);
  s.schedule = make_schedule(plan, window);
  const double total = plan.total_duration();
  const double dt = total / std::max(1, opts.samples);

  std::vector<PopulationTarget> targets{s.target};
  const std::vector<NamedState> aux =
      plan.n_ions == 2 ? std::vector<NamedState>{NamedState::S, NamedState::uu, NamedState::dd}
                       : std::vector<NamedState>{NamedState::Wbar, NamedState::uuu, NamedState::ddd, NamedState::Wc,
                                                 NamedState::Wac};
  for (NamedState a : aux) targets.push_back(named_target(s.dims, a));

  ProtocolTrace out;
  for (const auto& t : targets) out.record.target_names.push_back(t.name);
  const int spin_dim = s.dims.spin_dim();
  CMatrix spin_end = CMatrix::Zero(spin_dim, spin_dim);
  bool captured = false;
  auto at_end = [&](double t) { return std::abs(t - total) <= 1e-9 * total; };

  if (!noise.has_dissipation()) {
    const std::vector<double> w = thermal_weights(noise.n_bar, s.dims.n_fock);
    out.record.times = sample_times(s.schedule, dt);
    const std::size_t n_samples = out.record.times.size();
    out.record.samples.assign(n_samples, PopulationSample{std::vector<double>(plan.n_ions + 1, 0.0), 0.0,
                                                          std::vector<double>(targets.size(), 0.0)});
    std::vector<double> top(n_samples, 0.0);
    EvolveOptions eo;
    eo.sample_dt = dt;
    eo.stark_shifts = noise.stark_shifts;
    eo.truncation_limit = std::numeric_limits<double>::infinity();
    for (int n = 0; n < s.dims.n_fock; ++n) {
      if (w[n] < 1e-15) continue;
      std::size_t i = 0;
      evolve_pure(s.schedule, s.dims, s.geom, product_state(s.dims, s.initial_spin, n), eo,
                  [&](double t, const PureState& psi) {
                    const PopulationSample p = measure(psi, targets);
                    auto& acc = out.record.samples[i];
                    for (std::size_t k = 0; k < p.p_up.size(); ++k) acc.p_up[k] += w[n] * p.p_up[k];
                    for (std::size_t k = 0; k < p.targets.size(); ++k) acc.targets[k] += w[n] * p.targets[k];
                    acc.leakage += w[n] * p.leakage;
                    if (s.dims.n_fock > 1) top[i] += w[n] * top_fock_population(psi);
                    if (at_end(t)) {
                      spin_end += w[n] * reduce_to_spin(psi);
                      captured = true;
                    }
                    ++i;
                  });
    }
    for (double x : top)
      if (s.dims.n_fock > 1 && x >= 1e-8)
        throw TruncationError("Fock truncation overflow: top-level population " + std::to_string(x) +
                              " (raise n_fock)");
  } else {
    LindbladOptions lo;
    lo.tol = opts.lindblad_tol;
    lo.sample_dt = dt;
    const DensityOperator rho0 = thermal_product_state(s.dims, s.initial_spin, noise.n_bar);
    evolve_density(s.schedule, s.dims, s.geom, noise, rho0, lo, [&](double t, const DensityOperator& rho) {
      out.record.times.push_back(t);
      out.record.samples.push_back(measure(rho, targets));
      if (at_end(t)) {
        spin_end = reduce_to_spin(rho);
        captured = true;
      }
    });
  }
  if (!captured) throw NumericalError("trace grid missed the end of the protocol");
  out.qubit_state = qubit_register_state(plan.n_ions, s.dims.leak_level, spin_end);
  return out;
}

ErrorBudget error_budget(const ProtocolPlan& plan, const NoiseModel& noise, const SimOptions& opts) {
  plan.validate();
  noise.validate();
  ErrorBudget b;
  SimOptions so = opts;
  so.peak = plan.n_ions == 3 || opts.peak;

  if (plan.n_ions == 3) {
    b.leakage = 1.0 - simulate_fidelity(plan, NoiseModel{}, so).fidelity;
  } else if (plan.scheme == Scheme::single) {
    b.leakage = 1.0 / (4.0 * (1 + 2 * plan.m) * (1 + 2 * plan.m));
  } else {
    b.leakage = std::pow(plan.omega_d / plan.omega_s, 4);
  }

  b.spontaneous = 1.0 - std::exp(-decay_rates(noise, plan.n_ions).mean * plan.total_duration());
  b.thermal = noise.n_bar;

  const bool heat = noise.gamma_heat > 0.0;
  bool stark = false;
  for (double x : noise.stark_shifts) stark = stark || x != 0.0;
  if (heat || stark) {
    const double base = simulate_fidelity(plan, NoiseModel{}, so).fidelity;
    if (heat) {
      NoiseModel only;
      only.gamma_heat = noise.gamma_heat;
      b.heating = std::max(0.0, base - simulate_fidelity(plan, only, so).fidelity);
    }
    if (stark) {
      NoiseModel only;
      only.stark_shifts = noise.stark_shifts;
      b.stark = std::max(0.0, base - simulate_fidelity(plan, only, so).fidelity);
    }
  }
  double keep = 1.0;
  for (double e : {b.leakage, b.spontaneous, b.thermal, b.heating, b.stark}) keep *= 1.0 - e;
  b.total_predicted = 1.0 - keep;
  return b;
}

namespace {

double& param_ref(ProtocolPlan& p, TuneParam k) {
  switch (k) {
    case TuneParam::omega_d: return p.omega_d;
    case TuneParam::t1: return p.t1;
    case TuneParam::t2: return p.t2;
    case TuneParam::delta: return p.delta;
  }
  return p.omega_d;
}

// Noiseless end fidelity with propagators cached per segment Hamiltonian.
class EndFidelity {
 public:
  EndFidelity(const ProtocolPlan& plan, const SimOptions& opts)
      : dims_{plan.n_ions, opts.n_fock, false}, geom_(plan_geometry(plan)) {
    psi0_ = named_state(dims_, plan_initial(plan), 0);
    targets_.push_back(named_target(dims_, plan_target(plan)));
  }

  double operator()(const ProtocolPlan& plan) {
    ++evaluations;
    ProtocolPlan p = plan;
    if (p.scheme == Scheme::single) {
      p.t_pi = effective_pi_time(p.n_ions, p.omega_d);
      p.t1 = p.t_pi;
    }
    const PulseSchedule s = make_schedule(p);
    CVector psi = psi0_.amplitudes;
    for (const auto& seg : s.segments) psi = propagator(seg).apply(psi, seg.duration);
    return measure(PureState{dims_, psi}, targets_).targets[0];
  }

  int evaluations = 0;

 private:
  const SegmentPropagator& propagator(const PulseSegment& seg) {
    const auto key = std::make_tuple(seg.omega_s, seg.omega_d, seg.delta, seg.laser_phase);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      if (cache_.size() > 4096) cache_.clear();
      it = cache_.emplace(key, SegmentPropagator(segment_hamiltonian(dims_, geom_, seg).matrix)).first;
    }
    return it->second;
  }

  SystemDims dims_;
  IonGeometry geom_;
  PureState psi0_;
  std::vector<PopulationTarget> targets_;
  std::map<std::tuple<double, double, double, double>, SegmentPropagator> cache_;
};

}  // namespace

FineTuneResult fine_tune(const ProtocolPlan& plan, const std::vector<TuneParam>& free_params, const SimOptions& opts) {
  plan.validate();
  FineTuneResult r;
  r.plan = plan;
  EndFidelity objective(plan, opts);
  r.start_fidelity = r.fidelity = objective(plan);
  if (free_params.empty()) {
    r.evaluations = objective.evaluations;
    return r;
  }
  for (TuneParam k : free_params) {
    if (plan.scheme == Scheme::single && (k == TuneParam::t1 || k == TuneParam::t2))
      throw std::invalid_argument("t1/t2 are only tunable for the composite scheme");
  }

  std::vector<std::pair<double, double>> box;
  for (TuneParam k : free_params) {
    const double v = param_ref(r.plan, k);
    box.emplace_back(std::min(0.8 * v, 1.2 * v), std::max(0.8 * v, 1.2 * v));
  }

  ProtocolPlan cur = plan;
  double best = r.fidelity;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int cycle = 0; cycle < 200; ++cycle) {
    const double cycle_start = best;
    for (std::size_t j = 0; j < free_params.size(); ++j) {
      const TuneParam k = free_params[j];
      auto eval = [&](double x) {
        ProtocolPlan p = cur;
        param_ref(p, k) = x;
        return objective(p);
      };
      // line search: local bracket around the current value, shrinking with the cycle
      const double width = (box[j].second - box[j].first) * std::pow(0.5, std::min(cycle, 12)) / 2.0;
      const double x0 = param_ref(cur, k);
      double a = std::max(box[j].first, x0 - width);
      double b = std::min(box[j].second, x0 + width);
      // coarse scan picks the bracket, golden section refines it
      constexpr int kScan = 12;
      double bx = x0;
      double bf = best;
      for (int i = 0; i <= kScan; ++i) {
        const double x = a + (b - a) * i / kScan;
        const double f = eval(x);
        if (f > bf) {
          bf = f;
          bx = x;
        }
      }
      const double step = (b - a) / kScan;
      a = std::max(a, bx - step);
      b = std::min(b, bx + step);
      double c = b - inv_phi * (b - a);
      double d = a + inv_phi * (b - a);
      double fc = eval(c);
      double fd = eval(d);
      for (int it = 0; it < 60 && (b - a) > 1e-12 * std::abs(x0); ++it) {
        if (fc > fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - inv_phi * (b - a);
          fc = eval(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + inv_phi * (b - a);
          fd = eval(d);
        }
      }
      for (auto [x, f] : {std::pair{c, fc}, std::pair{d, fd}}) {
        if (f > bf) {
          bf = f;
          bx = x;
        }
      }
      if (bf > best) {
        best = bf;
        param_ref(cur, k) = bx;
      }
    }
    if (best - cycle_start < 1e-12 && cycle >= 12) break;
  }

  if (cur.scheme == Scheme::single) {
    cur.t_pi = effective_pi_time(cur.n_ions, cur.omega_d);
    cur.t1 = cur.t_pi;
  } else {
    cur.t_pi = cur.t1 + cur.t2;
  }
  r.plan = cur;
  r.fidelity = best;
  r.improved = best > r.start_fidelity;
  r.evaluations = objective.evaluations;
  return r;
}

Preset protocol_preset(const std::string& name) {
  Preset p;
  p.name = name;
  if (name == "fig2") {
    p.plan = with_omega_d(plan_single(khz(17.6), 2), khz(1.52));
    p.plan.delta = khz(27.1);
    p.noise = spontaneous_preset(2, 8e-3, p.plan.t_pi);
    p.noise.n_bar = 0.006;
  } else if (name == "fig3") {
    p.plan = with_omega_d(plan_composite(khz(17.3), 1), khz(2.55));
    p.plan.delta = khz(26.8);
    p.plan.t1 = us(25.4);
    p.plan.t2 = us(47.3);
    p.noise = spontaneous_preset(2, 5e-3, p.plan.total_duration());
    p.noise.n_bar = 0.006;
  } else if (name == "three_ion") {
    p.plan = plan_three_ion(khz(19.0), khz(1.24));
    p.noise = spontaneous_preset(3, 0.010, p.plan.t_pi);
    for (double* g : {&p.noise.gamma_du, &p.noise.gamma_ud, &p.noise.gamma_ou, &p.noise.gamma_od})
      *g *= kThreeIonSpontaneousScale;
    p.noise.gamma_heat = 136.0;
    p.noise.n_bar = 0.02;
    p.noise.stark_shifts = {kThreeIonStarkShift, 0.0, kThreeIonStarkShift};
    p.sim.peak = true;
  } else {
    throw std::invalid_argument("unknown protocol preset '" + name + "'");
  }
  return p;
}

}  // namespace zeno
