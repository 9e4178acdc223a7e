#include "zeno/dressed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace zeno {

Eigen::Matrix3d undesired_hamiltonian(double omega_s, double delta) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  h(1, 1) = delta;
  h(2, 2) = 2.0 * delta;
  h(1, 0) = h(0, 1) = std::sqrt(2.0) * omega_s;
  h(2, 1) = h(1, 2) = -2.0 * omega_s;
  return h;
}

double optimal_detuning(double omega_s) { return std::sqrt(7.0 / 3.0) * std::abs(omega_s); }

DressedSpectrum dressed_spectrum(double omega_s, double delta, double omega_d) {
  if (omega_s == 0.0) throw std::invalid_argument("dressed spectrum needs omega_s != 0");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(undesired_hamiltonian(omega_s, delta));
  const Eigen::Vector3d w = es.eigenvalues();  // ascending
  const Eigen::Matrix3d v = es.eigenvectors();

  DressedSpectrum out;
  out.omega_s = omega_s;
  out.delta = delta;
  out.omega_d = omega_d;

  const double scale = std::abs(omega_s);
  out.degenerate = (w(1) - w(0)) < 1e-9 * scale || (w(2) - w(1)) < 1e-9 * scale;

  // sorted index for Delta_1, Delta_2, Delta_3
  const bool positive = delta >= 0.0;
  const std::array<int, 3> order = positive ? std::array<int, 3>{1, 0, 2} : std::array<int, 3>{1, 2, 0};

  for (int n = 0; n < 3; ++n) {
    const int j = order[n];
    out.eigenfrequencies[n] = w(j);
    Eigen::Vector3d col = v.col(j);
    const double want = n < 2 ? 1.0 : -1.0;
    const double ref = std::abs(col(1)) > 1e-12 ? col(1) : col(0);
    if (ref * want < 0.0) col = -col;
    out.eigenvectors.col(n) = col;
    if (std::abs(w(j)) < 1e-9 * scale) out.dark_index = n;
  }

  out.couplings[0] = std::sqrt(2.0) * omega_d;
  for (int n = 0; n < 3; ++n) out.couplings[n + 1] = std::sqrt(2.0) * omega_d * out.eigenvectors(0, n);
  return out;
}

namespace {

std::array<double, 3> sorted_eigs(double omega_s, double delta) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(undesired_hamiltonian(omega_s, delta), Eigen::EigenvaluesOnly);
  const auto& e = es.eigenvalues();
  return {e(0), e(1), e(2)};
}

template <class F>
double bisect(F f, double a, double b) {
  double fa = f(a);
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

void add_unique(std::vector<double>& v, double x, double tol) {
  for (double y : v)
    if (std::abs(x - y) <= tol) return;
  v.push_back(x);
}

}  // namespace

DetuningScan scan_detuning(double omega_s, double delta_min, double delta_max, int n_points) {
  if (n_points < 2) throw std::invalid_argument("scan needs n_points >= 2");
  if (!(delta_max > delta_min)) throw std::invalid_argument("scan needs delta_max > delta_min");
  DetuningScan out;
  out.omega_s = omega_s;
  for (int i = 0; i < n_points; ++i) {
    const double d = delta_min + (delta_max - delta_min) * i / (n_points - 1);
    out.deltas.push_back(d);
    std::array<double, 3> e = sorted_eigs(omega_s, d);
    if (!out.branches.empty()) {
      // assignment to the previous point minimizing the total jump
      const auto& prev = out.branches.back();
      std::array<int, 3> perm{0, 1, 2};
      std::array<int, 3> best = perm;
      double best_cost = std::numeric_limits<double>::infinity();
      do {
        double cost = 0.0;
        for (int b = 0; b < 3; ++b) cost += std::abs(e[perm[b]] - prev[b]);
        if (cost < best_cost) {
          best_cost = cost;
          best = perm;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      e = {e[best[0]], e[best[1]], e[best[2]]};
    }
    out.branches.push_back(e);
  }

  const double tol = 1e-9 * std::max(std::abs(omega_s), 1e-300);
  const double merge = 1e-7 * (delta_max - delta_min);
  auto sorted_at = [&](double d) { return sorted_eigs(omega_s, d); };
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      auto g = [&](double d) {
        const auto e = sorted_at(d);
        return e[a] + e[b];
      };
      double prev = g(out.deltas[0]);
      if (std::abs(prev) < tol) add_unique(out.symmetric_points, out.deltas[0], merge);
      for (int i = 1; i < n_points; ++i) {
        const double cur = g(out.deltas[i]);
        if (std::abs(cur) < tol) {
          add_unique(out.symmetric_points, out.deltas[i], merge);
        } else if ((prev < 0.0) != (cur < 0.0) && std::abs(prev) >= tol) {
          add_unique(out.symmetric_points, bisect(g, out.deltas[i - 1], out.deltas[i]), merge);
        }
        prev = cur;
      }
    }
  }
  // a zero eigenvalue means det(H_u) = 0; det is monotone in delta
  auto det = [&](double d) { return undesired_hamiltonian(omega_s, d).determinant(); };
  double prev = det(out.deltas[0]);
  for (int i = 1; i < n_points; ++i) {
    const double cur = det(out.deltas[i]);
    if (cur == 0.0)
      add_unique(out.dark_points, out.deltas[i], merge);
    else if (prev != 0.0 && (prev < 0.0) != (cur < 0.0))
      add_unique(out.dark_points, bisect(det, out.deltas[i - 1], out.deltas[i]), merge);
    prev = cur;
  }
  if (det(out.deltas[0]) == 0.0) add_unique(out.dark_points, out.deltas[0], merge);
  std::sort(out.symmetric_points.begin(), out.symmetric_points.end());
  std::sort(out.dark_points.begin(), out.dark_points.end());
  return out;
}

namespace {

void check_resonance(const DressedSpectrum& spec) {
  const double w0 = spec.couplings[0];
  for (double d : spec.eigenfrequencies) {
    if (std::abs(std::abs(d) - w0) <= 1e-6 * std::max(std::abs(d), w0))
      throw NumericalError("perturbative amplitude is resonant (Omega_0 = |Delta_n|)");
    if (d == 0.0) throw NumericalError("perturbative amplitude undefined for a dark mode");
  }
}

// First-order amplitude with constant Delta from t = 0.
cplx single_exact(double om, double dn, double w0, double t) {
  const cplx pre = kI * om / (dn * dn - w0 * w0);
  return pre * (dn * std::sin(w0 * t) + kI * w0 * (std::cos(w0 * t) - std::polar(1.0, -dn * t)));
}

cplx single_simple(double om, double dn, double w0, double t) { return kI * om / dn * std::sin(w0 * t); }

}  // namespace

PerturbativeTrace perturbative_single(const DressedSpectrum& spec, const std::vector<double>& t_grid,
                                      bool simplified) {
  check_resonance(spec);
  PerturbativeTrace out;
  out.variant = simplified ? PerturbativeVariant::single_simplified : PerturbativeVariant::single_exact;
  out.times = t_grid;
  const double w0 = spec.couplings[0];
  for (double t : t_grid) {
    out.c_T0.push_back(-kI * std::sin(w0 * t));
    for (int n = 0; n < 3; ++n) {
      const double om = spec.couplings[n + 1];
      const double dn = spec.eigenfrequencies[n];
      out.c_n1[n].push_back(simplified ? single_simple(om, dn, w0, t) : single_exact(om, dn, w0, t));
    }
  }
  return out;
}

PerturbativeTrace perturbative_composite(const DressedSpectrum& spec, double t1, const std::vector<double>& t_grid,
                                         bool simplified) {
  check_resonance(spec);
  if (t_grid.empty()) throw std::invalid_argument("empty time grid");
  const double t_end = *std::max_element(t_grid.begin(), t_grid.end());
  if (!(t1 > 0.0 && t1 < t_end)) throw std::invalid_argument("composite switch time must satisfy 0 < t1 < max(t)");
  PerturbativeTrace out;
  out.variant = simplified ? PerturbativeVariant::composite_simplified : PerturbativeVariant::composite_exact;
  out.times = t_grid;
  out.t1 = t1;
  const double w0 = spec.couplings[0];
  const double s1 = std::sin(w0 * t1);
  for (double t : t_grid) {
    out.c_T0.push_back(-kI * std::sin(w0 * t));
    for (int n = 0; n < 3; ++n) {
      const double om = spec.couplings[n + 1];
      const double dn = spec.eigenfrequencies[n];
      cplx c;
      if (t <= t1) {
        c = simplified ? single_simple(om, dn, w0, t) : single_exact(om, dn, w0, t);
      } else if (simplified) {
        c = -kI * om / dn * (std::sin(w0 * t) - 2.0 * s1 * std::polar(1.0, dn * (t - t1)));
      } else {
        const cplx pre = -kI * om / (dn * dn - w0 * w0);
        c = pre * (dn * (std::sin(w0 * t) - 2.0 * s1 * std::polar(1.0, dn * (t - t1))) -
                   kI * w0 * (std::cos(w0 * t) - std::polar(1.0, dn * (t - 2.0 * t1))));
      }
      out.c_n1[n].push_back(c);
    }
  }
  return out;
}

}  // namespace zeno
