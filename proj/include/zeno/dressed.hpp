#pragma once

// The sideband-coupled subspace {|dd,0>, |S,1>, |uu,2>} reached from |T,0> by the
// microwave: its dressed spectrum versus detuning and first-order perturbative
// amplitudes for single and composite pulses.

#include <array>
#include <vector>

#include "zeno/types.hpp"

namespace zeno {

/// Basis order (|dd,0>, |S,1>, |uu,2>).
Eigen::Matrix3d undesired_hamiltonian(double omega_s, double delta);

/// sqrt(7/3) |Omega_s|, where |Delta_1| = |Delta_2|.
double optimal_detuning(double omega_s);

struct DressedSpectrum {
  double omega_s = 0.0;
  double delta = 0.0;
  double omega_d = 0.0;
  /// Delta_1 is the middle eigenvalue, Delta_3 the extreme on the side of sign(delta)
  /// (delta >= 0 counts as positive), Delta_2 the other extreme.
  std::array<double, 3> eigenfrequencies{};
  /// Column n is psi_{n+1}. The |S,1> component is positive for psi_1, psi_2 and
  /// negative for psi_3; when it vanishes the |dd,0> component takes its place.
  Eigen::Matrix3d eigenvectors = Eigen::Matrix3d::Zero();
  /// Omega_0 = sqrt(2) Omega_d, Omega_n = sqrt(2) Omega_d * psi_n[|dd,0>].
  std::array<double, 4> couplings{};
  bool degenerate = false;
  int dark_index = -1;  // n-1 of a mode with |Delta| < 1e-9 Omega_s, else -1
};

/// Throws std::invalid_argument if omega_s == 0.
DressedSpectrum dressed_spectrum(double omega_s, double delta, double omega_d);

struct DetuningScan {
  double omega_s = 0.0;
  std::vector<double> deltas;
  /// Continuous branches; branch b at point i is branches[i][b].
  std::vector<std::array<double, 3>> branches;
  /// Detunings where two eigenfrequencies have equal magnitude and opposite sign.
  std::vector<double> symmetric_points;
  /// Detunings where one eigenfrequency vanishes.
  std::vector<double> dark_points;
};

DetuningScan scan_detuning(double omega_s, double delta_min, double delta_max, int n_points);

enum class PerturbativeVariant { single_exact, single_simplified, composite_exact, composite_simplified };

struct PerturbativeTrace {
  std::vector<double> times;
  std::vector<cplx> c_T0;
  std::array<std::vector<cplx>, 3> c_n1;
  PerturbativeVariant variant = PerturbativeVariant::single_exact;
  double t1 = 0.0;  // composite switching time
};

/// Throws NumericalError when Omega_0 is within 1e-6 (relative) of some |Delta_n|.
PerturbativeTrace perturbative_single(const DressedSpectrum& spec, const std::vector<double>& t_grid,
                                      bool simplified = false);
/// Delta_n reverses sign after t1.
PerturbativeTrace perturbative_composite(const DressedSpectrum& spec, double t1, const std::vector<double>& t_grid,
                                         bool simplified = false);

}  // namespace zeno
