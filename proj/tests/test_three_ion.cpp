#include <cmath>

#include "doctest.h"
#include "zeno/protocol.hpp"
#include "zeno/three_ion.hpp"

using namespace zeno;

TEST_SUITE("three_ion") {

TEST_CASE("ladder couplings") {
  const double ws = 2.0, wd = 0.1;
  const auto l = three_ion_ladder(ws, wd);
  CHECK(l.w_dark_residual < 1e-12);
  CHECK(l.uuu_dark_residual < 1e-12);
  // columns: uuu0, W0, Wbar0, Wc1, ddd0, Wac1, Wbar_c1
  CHECK(std::abs(l.microwave(1, 0) - std::sqrt(3.0) * wd) < 1e-14);
  CHECK(std::abs(l.microwave(2, 1) - 2.0 * wd) < 1e-14);
  CHECK(std::abs(l.sideband(3, 2)) > 0.5 * ws);
  for (int a = 0; a < static_cast<int>(l.states.size()); ++a) {
    if (l.states[a].fock == 1) CHECK(std::abs(l.sideband(a, 1)) < 1e-12);
  }
  CHECK((l.sideband - l.sideband.adjoint()).norm() < 1e-12);
}

TEST_CASE("ladder needs the COM geometry") {
  CHECK_THROWS_AS(three_ion_ladder(1.0, 0.1, 0.0, IonGeometry::two_ion_stretch()), std::invalid_argument);
  IonGeometry flat{3, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
  CHECK_THROWS_AS(three_ion_ladder(1.0, 0.1, 0.0, flat), std::invalid_argument);
}

TEST_CASE("strong sideband restricts the dynamics to |uuu,0> and |W,0>") {
  const double ws = khz(19.0);
  const auto plan = plan_three_ion(ws, ws / 15.0);
  const SystemDims d{3, 6, false};
  const auto traj = evolve_pure(make_schedule(plan), d, plan_geometry(plan), named_state(d, NamedState::uuu, 0),
                                {plan.t_pi / 200});
  const CVector a = named_state(d, NamedState::uuu, 0).amplitudes;
  const CVector b = named_state(d, NamedState::W, 0).amplitudes;
  for (const auto& s : traj.states) CHECK(std::norm(a.dot(s.amplitudes)) + std::norm(b.dot(s.amplitudes)) > 0.95);

  SimOptions so;
  so.peak = true;
  so.peak_window = 1.5;
  so.samples = 2000;
  const auto r = simulate_fidelity(plan, NoiseModel{}, so);
  CHECK(r.time == doctest::Approx(plan.t_pi).epsilon(0.02));
}

}
