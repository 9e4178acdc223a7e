#include <algorithm>
#include <array>
#include <cmath>

#include "doctest.h"
#include "zeno/dynamics.hpp"
#include "zeno/protocol.hpp"

using namespace zeno;

namespace {

PulseSchedule one_segment(double duration, double omega_s, double omega_d, double delta) {
  PulseSegment s;
  s.duration = duration;
  s.omega_s = omega_s;
  s.omega_d = omega_d;
  s.delta = delta;
  return PulseSchedule{{s}};
}

// Lab-frame sideband coupling: the frame Hamiltonian at delta = 0 split into the parts that
// lower and raise the Fock number, recombined with e^{-+i delta t}.
struct LabFrame {
  CMatrix lower;
  CMatrix raise;
  CMatrix drive;
  double delta;
  CMatrix at(double t) const {
    return std::polar(1.0, -delta * t) * lower + std::polar(1.0, delta * t) * raise + drive;
  }
};

CVector rk4_lab(const LabFrame& lab, CVector psi, double total, int steps) {
  const double h = total / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    auto f = [&](double tt, const CVector& v) -> CVector { return -kI * (lab.at(tt) * v); };
    const CVector k1 = f(t, psi);
    const CVector k2 = f(t + h / 2, psi + h / 2 * k1);
    const CVector k3 = f(t + h / 2, psi + h / 2 * k2);
    const CVector k4 = f(t + h, psi + h * k3);
    psi += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return psi;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("microwave-only ladder matches the closed form") {
  // H = sqrt2 wd (|T><uu| + |dd><T| + h.c.) is 2 wd J_x of a spin 1: rotation angle 2 wd t
  const SystemDims d{2, 3, false};
  const double wd = khz(1.5);
  const double total = 300e-6;
  const auto traj = evolve_pure(one_segment(total, 0.0, wd, khz(20.0)), d, IonGeometry::two_ion_stretch(),
                                named_state(d, NamedState::uu, 0), {total / 50});
  const auto uu = named_state(d, NamedState::uu, 0).amplitudes;
  const auto t0 = named_state(d, NamedState::T, 0).amplitudes;
  const auto dd = named_state(d, NamedState::dd, 0).amplitudes;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double th = 2.0 * wd * traj.times[k];
    const CVector& psi = traj.states[k].amplitudes;
    CHECK(std::norm(uu.dot(psi)) == doctest::Approx(std::pow((1 + std::cos(th)) / 2, 2)).epsilon(1e-9));
    CHECK(std::norm(t0.dot(psi)) == doctest::Approx(std::pow(std::sin(th), 2) / 2).epsilon(1e-9));
    CHECK(std::norm(dd.dot(psi)) == doctest::Approx(std::pow((1 - std::cos(th)) / 2, 2)).epsilon(1e-9));
  }
}

TEST_CASE("rotating frame agrees with lab-frame integration") {
  const SystemDims d{2, 5, false};
  const auto geom = IonGeometry::two_ion_stretch();
  const double ws = khz(17.6), wd = khz(2.0), delta = khz(27.0), total = 80e-6;
  PulseSegment s0;
  s0.omega_s = ws;
  s0.duration = total;
  const CMatrix k = sideband_hamiltonian(d, geom, s0).matrix;
  LabFrame lab{CMatrix::Zero(d.dim(), d.dim()), CMatrix::Zero(d.dim(), d.dim()),
               microwave_hamiltonian(d, wd, 0.0).matrix, delta};
  for (Eigen::Index r = 0; r < k.rows(); ++r)
    for (Eigen::Index c = 0; c < k.cols(); ++c) {
      const int fr = static_cast<int>(r % d.n_fock), fc = static_cast<int>(c % d.n_fock);
      if (fr == fc - 1) lab.lower(r, c) = k(r, c);
      if (fr == fc + 1) lab.raise(r, c) = k(r, c);
    }
  CHECK((lab.lower + lab.raise - k).norm() < 1e-12);

  const PureState init = named_state(d, NamedState::uu, 0);
  const CVector lab_end = rk4_lab(lab, init.amplitudes, total, 40000);
  const PureState frame_end = propagate_pure(one_segment(total, ws, wd, delta), d, geom, init);
  // psi_frame = exp(-i delta t n) psi_lab
  CVector mapped = lab_end;
  for (Eigen::Index i = 0; i < mapped.size(); ++i) mapped(i) *= std::polar(1.0, -delta * total * (i % d.n_fock));
  CHECK((mapped - frame_end.amplitudes).norm() < 1e-8);
}

TEST_CASE("empty schedule keeps the initial state") {
  const SystemDims d{2, 3, false};
  const auto init = named_state(d, NamedState::T, 1);
  const auto traj = evolve_pure(PulseSchedule{}, d, IonGeometry::two_ion_stretch(), init);
  REQUIRE(traj.times.size() == 1);
  CHECK((traj.states[0].amplitudes - init.amplitudes).norm() == 0.0);
}

TEST_CASE("sample times include boundaries and are strictly increasing") {
  PulseSchedule s = one_segment(1e-5, 0, 1, 0);
  s.segments.push_back(s.segments[0]);
  s.segments[1].duration = 0.35e-5;
  const auto ts = sample_times(s, 0.3e-5);
  CHECK(ts.front() == 0.0);
  CHECK(ts.back() == doctest::Approx(1.35e-5));
  CHECK(std::find(ts.begin(), ts.end(), 1e-5) != ts.end());
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] > ts[i - 1]);
  CHECK_THROWS_AS(sample_times(s, -1.0), std::invalid_argument);
}

TEST_CASE("norm is preserved and composition holds") {
  const auto plan = plan_composite(khz(17.6), 1);
  const SystemDims d{2, 8, false};
  const auto geom = plan_geometry(plan);
  const auto sched = make_schedule(plan);
  const auto init = named_state(d, NamedState::uu, 0);
  const auto traj = evolve_pure(sched, d, geom, init);
  for (const auto& s : traj.states) CHECK(std::abs(s.amplitudes.norm() - 1.0) < 1e-9);

  PulseSchedule a{{sched.segments[0]}}, b{{sched.segments[1]}};
  const auto mid = propagate_pure(a, d, geom, init);
  const auto end = propagate_pure(b, d, geom, mid);
  CHECK((end.amplitudes - traj.states.back().amplitudes).norm() < 1e-10);
}

TEST_CASE("two-ion evolution stays in the coupled subspace") {
  const auto plan = plan_single(khz(17.6), 2);
  const SystemDims d{2, 8, false};
  const auto traj = evolve_pure(make_schedule(plan), d, plan_geometry(plan), named_state(d, NamedState::uu, 0));
  // from |uu,0> the microwave and sideband only reach {uu, T, dd} x even n and S x odd n
  const CVector sv = spin_state(d, NamedState::S);
  for (const auto& s : traj.states) {
    double outside = 0.0;
    for (int n = 0; n < d.n_fock; ++n) {
      cplx on_s = 0.0;
      double total = 0.0;
      for (int spin = 0; spin < 4; ++spin) {
        const cplx a = s.amplitudes(d.index(spin, n));
        on_s += std::conj(sv(spin)) * a;
        total += std::norm(a);
      }
      outside += n % 2 == 1 ? total - std::norm(on_s) : std::norm(on_s);
    }
    CHECK(outside < 1e-6);
  }
}

TEST_CASE("truncation overflow is reported") {
  const SystemDims d{2, 3, false};
  const auto plan = plan_single(khz(17.6), 2);
  CHECK_THROWS_AS(evolve_pure(make_schedule(plan), d, plan_geometry(plan), named_state(d, NamedState::uu, 0)),
                  TruncationError);
}

TEST_CASE("invalid inputs") {
  const SystemDims d{2, 3, false};
  PureState bad = named_state(d, NamedState::uu, 0);
  bad.amplitudes *= 2.0;
  CHECK_THROWS_AS(evolve_pure(one_segment(1e-6, 0, 1, 0), d, IonGeometry::two_ion_stretch(), bad),
                  std::invalid_argument);
  EvolveOptions o;
  o.sample_dt = -1.0;
  CHECK_THROWS_AS(evolve_pure(one_segment(1e-6, 0, 1, 0), d, IonGeometry::two_ion_stretch(),
                              named_state(d, NamedState::uu, 0), o),
                  std::invalid_argument);
}

TEST_CASE("lindblad without noise matches the pure evolution") {
  const auto plan = plan_single(khz(17.6), 1);
  const SystemDims d{2, 6, false};
  const auto geom = plan_geometry(plan);
  const auto sched = make_schedule(plan);
  const auto init = named_state(d, NamedState::uu, 0);
  LindbladOptions lo;
  lo.tol = 1e-8;
  lo.sample_dt = plan.t_pi / 20;
  const auto rt = evolve_density(sched, d, geom, NoiseModel{}, to_density(init), lo);
  const auto pt = evolve_pure(sched, d, geom, init, {plan.t_pi / 20});
  REQUIRE(rt.times.size() == pt.times.size());
  for (std::size_t k = 0; k < rt.times.size(); ++k) {
    const CVector& psi = pt.states[k].amplitudes;
    CHECK((rt.states[k].matrix - psi * psi.adjoint()).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("lindblad keeps trace and hermiticity; uniform decay follows exp") {
  const auto plan = plan_single(khz(17.6), 2);
  const SystemDims d{2, 6, true};
  const NoiseModel noise = spontaneous_preset(2, 8e-3, plan.t_pi);
  const auto rates = decay_rates(noise, 2);
  CHECK(1.0 - std::exp(-rates.mean * plan.t_pi) == doctest::Approx(8e-3).epsilon(1e-9));
  LindbladOptions lo;
  lo.sample_dt = plan.t_pi / 10;
  const auto init = to_density(named_state(d, NamedState::uu, 0));
  const auto traj = evolve_density(make_schedule(plan), d, plan_geometry(plan), noise, init, lo);
  for (const auto& r : traj.states) {
    CHECK(std::abs(r.matrix.trace() - 1.0) < 1e-8);
    CHECK((r.matrix - r.matrix.adjoint()).norm() < 1e-9);
  }
  const auto target = named_target(d, NamedState::T, 0);
  const double noisy = measure(traj.states.back(), {target}).targets[0];
  const PureState clean = propagate_pure(make_schedule(plan), {2, 6, false}, plan_geometry(plan),
                                         named_state({2, 6, false}, NamedState::uu, 0));
  const double ideal = measure(clean, {named_target({2, 6, false}, NamedState::T, 0)}).targets[0];
  CHECK((ideal - noisy) == doctest::Approx(8e-3).epsilon(0.10));
}

TEST_CASE("lindblad step halving gives up when tol is unreachable") {
  const auto plan = plan_single(khz(17.6), 2);
  const SystemDims d{2, 4, false};
  LindbladOptions lo;
  lo.tol = 1e-300;
  lo.max_halvings = 1;
  NoiseModel n;
  n.gamma_heat = 10.0;
  CHECK_THROWS_AS(evolve_density(make_schedule(plan), d, plan_geometry(plan), n,
                                 to_density(named_state(d, NamedState::uu, 0)), lo),
                  ConvergenceError);
}

TEST_CASE("population bookkeeping") {
  const SystemDims d{2, 3, true};
  const auto targets = std::vector<PopulationTarget>{named_target(d, NamedState::T, 0), named_target(d, NamedState::S)};
  const auto p0 = measure(named_state(d, NamedState::uu, 0), targets);
  CHECK(p0.p_up[2] == doctest::Approx(1.0));
  CHECK(p0.p_up[0] + p0.p_up[1] == doctest::Approx(0.0));
  const auto pt = measure(named_state(d, NamedState::T, 0), targets);
  CHECK(pt.p_up[1] == doctest::Approx(1.0));
  CHECK(pt.targets[0] == doctest::Approx(1.0));

  // superposition of |T,0> and |S,1>: P1 - F_T is the |S> population
  PureState mix{d, (0.8 * named_state(d, NamedState::T, 0).amplitudes + 0.6 * named_state(d, NamedState::S, 1).amplitudes)};
  const auto pm = measure(mix, targets);
  CHECK(pm.p_up[1] - pm.targets[0] == doctest::Approx(pm.targets[1]).epsilon(1e-12));
  CHECK(pm.targets[1] == doctest::Approx(0.36));

  const std::array<SpinLevel, 2> uo{SpinLevel::up, SpinLevel::out};
  PureState leak{d, CVector::Zero(d.dim())};
  leak.amplitudes(d.index(uo, 0)) = 1.0;
  const auto pl = measure(leak, targets);
  CHECK(pl.leakage == doctest::Approx(1.0));
  CHECK(pl.p_up[0] + pl.p_up[1] + pl.p_up[2] + pl.leakage == doctest::Approx(1.0));
}

TEST_CASE("experimental single pulse peaks near 116 us") {
  auto plan = with_omega_d(plan_single(khz(17.6), 2), khz(1.52));
  CHECK(plan.t_pi == doctest::Approx(116e-6).epsilon(0.05));
  SimOptions so;
  so.peak = true;
  so.peak_window = 1.3;
  const auto r = simulate_fidelity(plan, NoiseModel{}, so);
  CHECK(r.time == doctest::Approx(plan.t_pi).epsilon(0.05));
}

}
