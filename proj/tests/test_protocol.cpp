#include <cmath>

#include "doctest.h"
#include "zeno/protocol.hpp"

using namespace zeno;

TEST_SUITE("protocol") {

TEST_CASE("single-pulse plans") {
  const double ws = khz(17.6);
  for (int m : {0, 1, 2, 3}) {
    const auto p = plan_single(ws, m);
    CHECK(p.delta == doctest::Approx(std::sqrt(7.0 / 3.0) * ws));
    CHECK(p.omega_d == doctest::Approx(2.0 / std::sqrt(3.0) * ws / (std::sqrt(2.0) * (4 * m + 1))));
    CHECK(p.t_pi == doctest::Approx(kPi / (2.0 * std::sqrt(2.0) * p.omega_d)));
    CHECK(p.total_duration() == p.t_pi);
    CHECK(make_schedule(p).segments.size() == 1);
  }
  CHECK(plan_single(ws, 2).omega_d == doctest::Approx(2.0 * ws / (9.0 * std::sqrt(6.0))));
  CHECK(ws / plan_single(ws, 2).omega_d == doctest::Approx(11.02).epsilon(1e-3));
  CHECK_THROWS_AS(plan_single(ws, -1), std::invalid_argument);
  CHECK_THROWS_AS(plan_single(0.0, 1), std::invalid_argument);
}

TEST_CASE("composite plans and schedule") {
  const double ws = khz(17.6);
  for (int m : {1, 2}) {
    const auto p = plan_composite(ws, m);
    CHECK(ws / p.omega_d == doctest::Approx(3.0 * std::sqrt(6.0) * m));
    CHECK(p.t1 / p.t_pi == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(p.t2 == doctest::Approx(2.0 * p.t1));
  }
  const auto p = plan_composite(ws, 1);
  const auto s = make_schedule(p);
  REQUIRE(s.segments.size() == 2);
  CHECK(s.segments[0].duration == doctest::Approx(p.t1));
  CHECK(s.segments[1].duration == doctest::Approx(p.t2));
  CHECK(s.segments[1].delta == doctest::Approx(-p.delta));
  CHECK(s.segments[1].laser_phase == doctest::Approx(kPi));
  CHECK_THROWS_AS(plan_composite(ws, 0), std::invalid_argument);

  const auto exp = with_omega_d(plan_composite(khz(17.3), 1), khz(2.55));
  CHECK(exp.t1 == doctest::Approx(us(25.4)).epsilon(0.1));
}

TEST_CASE("three-ion plan") {
  const auto p = plan_three_ion(khz(19.0), khz(1.24));
  CHECK(p.delta == 0.0);
  CHECK(p.t_pi == doctest::Approx(kPi / (2.0 * std::sqrt(3.0) * khz(1.24))));
  CHECK(plan_target(p) == NamedState::W);
  CHECK(plan_initial(p) == NamedState::uuu);
}

TEST_CASE("plan validation") {
  ProtocolPlan p = plan_composite(khz(17.6), 1);
  p.t2 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = plan_three_ion(khz(19), khz(1));
  p.scheme = Scheme::composite;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(plan_single(khz(17.6), 1), 0.5), std::invalid_argument);
}

TEST_CASE("spontaneous preset inverts the deficit") {
  const double t = 116e-6;
  const NoiseModel n = spontaneous_preset(2, 8e-3, t);
  CHECK(n.gamma_du == doctest::Approx(n.gamma_ud));
  CHECK(n.gamma_ou == doctest::Approx(n.gamma_od));
  CHECK(n.gamma_du == doctest::Approx(n.gamma_ou));
  const auto r = decay_rates(n, 2);
  CHECK(r.all_up == doctest::Approx(r.target));
  CHECK(1.0 - std::exp(-r.mean * t) == doctest::Approx(8e-3).epsilon(1e-12));
}

TEST_CASE("error budget") {
  for (int m : {0, 1, 2}) {
    const auto b = error_budget(plan_single(khz(17.6), m), NoiseModel{});
    CHECK(b.leakage == doctest::Approx(1.0 / (4.0 * (1 + 2 * m) * (1 + 2 * m))));
    CHECK(b.spontaneous == 0.0);
    CHECK(b.total_predicted == doctest::Approx(b.leakage));
  }
  const auto comp = plan_composite(khz(17.6), 1);
  CHECK(error_budget(comp, NoiseModel{}).leakage == doctest::Approx(std::pow(comp.omega_d / comp.omega_s, 4)));
  CHECK(error_budget(comp, NoiseModel{}).leakage == doctest::Approx(4e-4).epsilon(0.25));

  auto pre = protocol_preset("fig2");
  pre.noise.gamma_du = pre.noise.gamma_ud = pre.noise.gamma_ou = pre.noise.gamma_od = 0.0;
  const auto b = error_budget(pre.plan, pre.noise);
  CHECK(b.thermal == doctest::Approx(0.006));
  CHECK(b.total_predicted <= b.leakage + b.spontaneous + b.thermal + b.heating + b.stark + 1e-15);
  for (double e : {b.leakage, b.spontaneous, b.thermal, b.heating, b.stark}) CHECK(e >= 0.0);
}

TEST_CASE("simulated plateaus sit above the first-order budget") {
  for (int m : {1, 2}) {
    const auto p = plan_single(khz(17.6), m);
    const double f = simulate_fidelity(p, NoiseModel{}).fidelity;
    CHECK(f >= 1.0 - 1.2 / (4.0 * (1 + 2 * m) * (1 + 2 * m)));
  }
}

TEST_CASE("fine tune") {
  const auto pre = protocol_preset("fig3");
  const auto same = fine_tune(pre.plan, {});
  CHECK(same.plan.t1 == pre.plan.t1);
  CHECK(same.fidelity == same.start_fidelity);
  CHECK_FALSE(same.improved);
  CHECK_THROWS_AS(fine_tune(plan_single(khz(17.6), 1), {TuneParam::t1}), std::invalid_argument);

  const auto tuned = fine_tune(pre.plan, {TuneParam::t1, TuneParam::t2});
  CHECK(tuned.improved);
  CHECK(1.0 - tuned.fidelity < 6e-4);
  CHECK(tuned.plan.t1 == doctest::Approx(us(24.18)).epsilon(0.5 / 24.18));
  CHECK(tuned.plan.t2 == doctest::Approx(us(47.57)).epsilon(0.5 / 47.57));
  // deterministic
  const auto again = fine_tune(pre.plan, {TuneParam::t1, TuneParam::t2});
  CHECK(again.plan.t1 == tuned.plan.t1);
  CHECK(again.fidelity == tuned.fidelity);
}

TEST_CASE("fine tune of omega_d agrees with a dense scan") {
  const auto p = plan_single(khz(17.6), 2);
  const auto tuned = fine_tune(p, {TuneParam::omega_d});
  double best = 0.0, best_wd = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double wd = p.omega_d * (0.8 + 0.4 * k / 400.0);
    const double f = simulate_fidelity(with_omega_d(p, wd), NoiseModel{}).fidelity;
    if (f > best) {
      best = f;
      best_wd = wd;
    }
  }
  CHECK(tuned.plan.omega_d == doctest::Approx(best_wd).epsilon(0.02));
  CHECK(tuned.fidelity >= best - 1e-6);
}

TEST_CASE("composite beats single under spontaneous emission") {
  const double ws = khz(17.6);
  const auto single = plan_single(ws, 2);
  const auto comp = plan_composite(ws, 1);
  const NoiseModel n = spontaneous_preset(2, 8e-3, single.t_pi);
  SimOptions so;
  so.n_fock = 6;
  CHECK(simulate_fidelity(comp, n, so).fidelity > simulate_fidelity(single, n, so).fidelity);
}

TEST_CASE("thermal occupation costs about n_bar") {
  const auto pre = protocol_preset("fig2");
  const double f0 = simulate_fidelity(pre.plan, NoiseModel{}).fidelity;
  NoiseModel n;
  n.n_bar = 0.006;
  const double deficit = f0 - simulate_fidelity(pre.plan, n).fidelity;
  CHECK(deficit > 0.0);
  CHECK(deficit <= 6e-3);
}

TEST_CASE("trace and register state") {
  const auto pre = protocol_preset("fig2");
  SimOptions so;
  so.samples = 100;
  const auto tr = simulate_trace(pre.plan, NoiseModel{}, so, 1.2);
  CHECK(tr.record.target_names.front() == "T");
  CHECK(tr.record.times.back() == doctest::Approx(1.2 * pre.plan.t_pi));
  CHECK(tr.qubit_state.rows() == 4);
  CHECK(std::abs(tr.qubit_state.trace() - 1.0) < 1e-9);
  const CVector t = spin_state(2, false, NamedState::T);
  const double f_end = simulate_fidelity(pre.plan, NoiseModel{}).fidelity;
  CHECK(t.dot(tr.qubit_state * t).real() == doctest::Approx(f_end).epsilon(1e-6));

  // |o> reads as dark
  CMatrix rho = CMatrix::Zero(9, 9);
  rho(0 * 3 + 2, 0 * 3 + 2) = 1.0;  // |up, o>
  const CMatrix q = qubit_register_state(2, true, rho);
  CHECK(std::abs(q(1, 1) - 1.0) < 1e-15);  // |up, down>
}

TEST_CASE("presets") {
  CHECK(protocol_preset("fig2").plan.t_pi == doctest::Approx(116e-6).epsilon(0.01));
  CHECK(protocol_preset("fig3").plan.t1 == doctest::Approx(us(25.4)));
  CHECK(protocol_preset("three_ion").noise.stark_shifts.size() == 3);
  CHECK_THROWS_AS(protocol_preset("nope"), std::invalid_argument);
}

}
