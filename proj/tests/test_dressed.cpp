#include <algorithm>
#include <array>
#include <cmath>

#include "doctest.h"
#include "zeno/dressed.hpp"
#include "zeno/protocol.hpp"

using namespace zeno;

namespace {

// Roots of lambda^3 - 3 d lambda^2 + (2 d^2 - a^2 - b^2) lambda + 2 a^2 d (a = sqrt2 ws, b = 2 ws)
// by the trigonometric method, ascending.
std::array<double, 3> cubic_roots(double ws, double d) {
  const double a2 = 2.0 * ws * ws, b2 = 4.0 * ws * ws;
  const double B = -3.0 * d, C = 2.0 * d * d - a2 - b2, D = 2.0 * a2 * d;
  const double p = C - B * B / 3.0;
  const double q = 2.0 * B * B * B / 27.0 - B * C / 3.0 + D;
  const double r = 2.0 * std::sqrt(-p / 3.0);
  const double phi = std::acos(std::clamp(3.0 * q / (p * r), -1.0, 1.0));
  std::array<double, 3> out;
  for (int k = 0; k < 3; ++k) out[k] = r * std::cos((phi - kTwoPi * k) / 3.0) - B / 3.0;
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> grid(double t_end, int n) {
  std::vector<double> g;
  for (int k = 0; k <= n; ++k) g.push_back(t_end * k / n);
  return g;
}

}  // namespace

TEST_SUITE("dressed") {

TEST_CASE("undesired hamiltonian entries") {
  const Eigen::Matrix3d h = undesired_hamiltonian(2.0, 0.5);
  CHECK(h(1, 0) == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(h(2, 1) == doctest::Approx(-4.0));
  CHECK(h(2, 2) == doctest::Approx(1.0));
  CHECK((h - h.transpose()).norm() == 0.0);
}

TEST_CASE("spectrum at resonance has a dark mode") {
  const auto s = dressed_spectrum(1.0, 0.0, 0.1);
  std::array<double, 3> e = s.eigenfrequencies;
  std::sort(e.begin(), e.end());
  CHECK(e[0] == doctest::Approx(-std::sqrt(6.0)));
  CHECK(std::abs(e[1]) < 1e-12);
  CHECK(e[2] == doctest::Approx(std::sqrt(6.0)));
  CHECK(s.dark_index >= 0);
}

TEST_CASE("no sideband gives the bare ladder") {
  const Eigen::Matrix3d h = undesired_hamiltonian(0.0, 0.7);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(h);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.0));
  CHECK(es.eigenvalues()(1) == doctest::Approx(0.7));
  CHECK(es.eigenvalues()(2) == doctest::Approx(1.4));
  CHECK_THROWS_AS(dressed_spectrum(0.0, 0.7, 0.1), std::invalid_argument);
}

TEST_CASE("optimal detuning spectrum, vectors and couplings") {
  const double ws = khz(17.6), wd = khz(1.5);
  const double d = optimal_detuning(ws);
  CHECK(d == doctest::Approx(std::sqrt(7.0 / 3.0) * ws).epsilon(1e-14));
  const auto s = dressed_spectrum(ws, d, wd);
  CHECK(s.eigenfrequencies[0] / ws == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-9));
  CHECK(s.eigenfrequencies[1] / ws == doctest::Approx(-2.0 / std::sqrt(3.0)).epsilon(1e-9));
  CHECK(s.eigenfrequencies[2] / ws == doctest::Approx(std::sqrt(21.0)).epsilon(1e-9));
  const Eigen::Vector3d psi3(-std::sqrt(2.0 / 59.0), -std::sqrt(21.0 / 59.0), 6.0 / std::sqrt(59.0));
  CHECK((s.eigenvectors.col(2) - psi3).norm() < 1e-9);
  CHECK((s.eigenvectors.transpose() * s.eigenvectors - Eigen::Matrix3d::Identity()).norm() < 1e-10);
  CHECK(s.couplings[0] == doctest::Approx(std::sqrt(2.0) * wd));
  const double r7 = std::sqrt(7.0);
  CHECK(s.couplings[1] / wd == doctest::Approx(std::sqrt(3.0 * (19.0 - r7) / 59.0)).epsilon(1e-9));
  CHECK(s.couplings[2] / wd == doctest::Approx(-std::sqrt(3.0 * (19.0 + r7) / 59.0)).epsilon(1e-9));
  CHECK(s.couplings[3] / wd == doctest::Approx(-2.0 / std::sqrt(59.0)).epsilon(1e-9));
  const double sum = s.couplings[1] * s.couplings[1] + s.couplings[2] * s.couplings[2] + s.couplings[3] * s.couplings[3];
  CHECK(sum == doctest::Approx(2.0 * wd * wd).epsilon(1e-12));
  CHECK(std::abs(s.eigenfrequencies[2] / s.eigenfrequencies[0]) == doctest::Approx(3.968).epsilon(1e-3));
}

TEST_CASE("eigenvalues agree with the characteristic polynomial") {
  for (double ws : {1.0, -0.7, 3.0})
    for (double d : {-5.0, -1.3, 0.2, 1.52753, 4.0}) {
      const auto s = dressed_spectrum(ws, d, 0.1);
      std::array<double, 3> e = s.eigenfrequencies;
      std::sort(e.begin(), e.end());
      const auto r = cubic_roots(ws, d);
      for (int k = 0; k < 3; ++k) CHECK(e[k] == doctest::Approx(r[k]).epsilon(1e-9).scale(std::abs(ws)));
    }
}

TEST_CASE("sign reversal flips the frequencies and keeps the vectors") {
  for (double d : {0.4, 1.0, std::sqrt(7.0 / 3.0), 3.5}) {
    const auto a = dressed_spectrum(1.0, d, 0.1);
    const auto b = dressed_spectrum(-1.0, -d, 0.1);
    for (int n = 0; n < 3; ++n) CHECK(b.eigenfrequencies[n] == doctest::Approx(-a.eigenfrequencies[n]));
    CHECK((a.eigenvectors - b.eigenvectors).norm() < 1e-12);
  }
}

TEST_CASE("detuning scan finds the symmetric and dark points") {
  const double ws = khz(17.6);
  const auto scan = scan_detuning(ws, -khz(80), khz(80), 1601);
  // +-sqrt(7/3) Omega_s, and delta = 0 where the outer pair is +-sqrt(6) Omega_s
  REQUIRE(scan.symmetric_points.size() == 3);
  CHECK(scan.symmetric_points[0] == doctest::Approx(-std::sqrt(7.0 / 3.0) * ws).epsilon(1e-6));
  CHECK(std::abs(scan.symmetric_points[1]) < 1e-6 * ws);
  CHECK(scan.symmetric_points[2] == doctest::Approx(std::sqrt(7.0 / 3.0) * ws).epsilon(1e-6));
  REQUIRE(scan.dark_points.size() == 1);
  CHECK(std::abs(scan.dark_points[0]) < 1e-6 * ws);
  // branches are continuous: no jump larger than the local eigenvalue spread allows
  for (std::size_t i = 1; i < scan.branches.size(); ++i)
    for (int b = 0; b < 3; ++b)
      CHECK(std::abs(scan.branches[i][b] - scan.branches[i - 1][b]) < 0.5 * ws);
  CHECK_THROWS_AS(scan_detuning(ws, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("perturbative single: initial value, leading order and leakage budget") {
  const double ws = 1.0;
  const auto p = plan_single(ws, 1);
  const auto s = dressed_spectrum(ws, p.delta, p.omega_d);
  const auto tr = perturbative_single(s, grid(p.t_pi, 200));
  for (int n = 0; n < 3; ++n) CHECK(std::abs(tr.c_n1[n][0]) == 0.0);

  for (int m : {1, 2}) {
    const auto pm = plan_single(ws, m);
    const auto sm = dressed_spectrum(ws, pm.delta, pm.omega_d);
    const auto end = perturbative_single(sm, {pm.t_pi});
    const double leak = std::norm(end.c_n1[0][0]) + std::norm(end.c_n1[1][0]);
    CHECK(leak == doctest::Approx(1.0 / (4.0 * (1 + 2 * m) * (1 + 2 * m))).epsilon(0.05));
  }

  // weak drive: |c_n|^2 -> (Omega_n/Delta_n)^2 sin^2(Omega_0 t)
  const auto weak = with_omega_d(p, ws / 400.0);
  const auto sw = dressed_spectrum(ws, weak.delta, weak.omega_d);
  const auto tw = perturbative_single(sw, grid(weak.t_pi, 400));
  for (int n = 0; n < 3; ++n) {
    const double a = sw.couplings[n + 1] / sw.eigenfrequencies[n];
    double dev = 0.0;
    for (std::size_t k = 0; k < tw.times.size(); ++k)
      dev = std::max(dev, std::abs(std::norm(tw.c_n1[n][k]) - a * a * std::pow(std::sin(sw.couplings[0] * tw.times[k]), 2)));
    CHECK(dev < 0.05 * a * a);
  }
}

TEST_CASE("m = 0 synchronization is resonant in first order") {
  const auto p = plan_single(1.0, 0);
  const auto s = dressed_spectrum(1.0, p.delta, p.omega_d);
  CHECK_THROWS_AS(perturbative_single(s, {p.t_pi}), NumericalError);
}

TEST_CASE("simplified forms agree to first order") {
  double err[2];
  int i = 0;
  for (double r : {20.0, 40.0}) {
    const auto p = with_omega_d(plan_single(1.0, 1), 1.0 / r);
    const auto s = dressed_spectrum(1.0, p.delta, p.omega_d);
    const auto g = grid(p.t_pi, 2000);
    const auto a = perturbative_single(s, g), b = perturbative_single(s, g, true);
    const auto ac = perturbative_composite(s, p.t_pi / 3, g), bc = perturbative_composite(s, p.t_pi / 3, g, true);
    double e = 0.0;
    for (int n = 0; n < 3; ++n)
      for (std::size_t k = 0; k < g.size(); ++k)
        e = std::max({e, std::abs(a.c_n1[n][k] - b.c_n1[n][k]), std::abs(ac.c_n1[n][k] - bc.c_n1[n][k])});
    err[i++] = e;
  }
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("composite cancellation at synchronization") {
  const double ws = khz(17.6);
  const auto p = plan_composite(ws, 1);
  const auto s = dressed_spectrum(ws, p.delta, p.omega_d);
  CHECK(2.0 * std::sin(s.couplings[0] * p.t1) == doctest::Approx(1.0).epsilon(1e-12));
  const auto g = grid(p.t_pi, 600);
  const auto simple = perturbative_composite(s, p.t1, g, true);
  const auto exact = perturbative_composite(s, p.t1, g);
  for (int n = 0; n < 2; ++n) {
    CHECK(std::abs(simple.c_n1[n].back()) < 1e-3 * p.omega_d / ws);
    double mx = 0.0;
    for (const auto& c : exact.c_n1[n]) mx = std::max(mx, std::abs(c));
    // the trajectory loops out and comes back close to the origin
    CHECK(std::abs(exact.c_n1[n].back()) < 0.15 * mx);
  }
  CHECK_THROWS_AS(perturbative_composite(s, 0.0, g), std::invalid_argument);
  CHECK_THROWS_AS(perturbative_composite(s, 2.0 * p.t_pi, g), std::invalid_argument);
}

TEST_CASE("composite with a late switch reduces to the single pulse") {
  const auto p = plan_single(1.0, 2);
  const auto s = dressed_spectrum(1.0, p.delta, p.omega_d);
  const auto single = perturbative_single(s, {p.t_pi});
  const auto comp = perturbative_composite(s, p.t_pi * (1 - 1e-12), {p.t_pi});
  for (int n = 0; n < 3; ++n) CHECK(std::abs(single.c_n1[n][0] - comp.c_n1[n][0]) < 1e-9);
}

}
