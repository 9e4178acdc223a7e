#pragma once

// Rotating-frame Hamiltonians and Lindblad operators built from
// experiment-level drive parameters.

#include <vector>

#include "zeno/hilbert.hpp"

namespace zeno {

/// One piecewise-constant drive interval. Rates are angular frequencies.
struct PulseSegment {
  double duration = 0.0;
  double omega_s = 0.0;  // sideband Rabi frequency, signed
  double omega_d = 0.0;  // microwave Rabi frequency, >= 0
  double delta = 0.0;    // sideband detuning, signed
  double laser_phase = 0.0;
  double microwave_phase = 0.0;
};

struct PulseSchedule {
  std::vector<PulseSegment> segments;

  double total_duration() const;
  /// Every segment needs a positive, finite duration and omega_d >= 0.
  void validate() const;
};

struct IonGeometry {
  int n_ions = 2;
  std::vector<double> phase_per_ion;
  std::vector<double> mode_amplitudes;

  static IonGeometry two_ion_stretch();
  static IonGeometry three_ion_com();

  void validate() const;
  /// s_i * exp(i theta_i) with s_i = amplitude_i / max |amplitude|.
  std::vector<cplx> coupling_weights() const;
};

struct NoiseModel {
  double gamma_du = 0.0;  // |up> -> |down|
  double gamma_ud = 0.0;  // |down> -> |up>
  double gamma_ou = 0.0;  // |up> -> |o>
  double gamma_od = 0.0;  // |down> -> |o>
  double gamma_heat = 0.0;
  std::vector<double> stark_shifts;  // per ion, rad/s; empty means none
  double n_bar = 0.0;

  void validate() const;
  bool needs_leak_level() const { return gamma_ou > 0.0 || gamma_od > 0.0; }
  bool has_dissipation() const;
};

/// delta a^dag a + [Omega_s e^{i phi} (sum_i w_i sigma_i^-) a + h.c.]
OperatorMatrix sideband_hamiltonian(const SystemDims& dims, const IonGeometry& geom, const PulseSegment& seg);

/// Omega_d sum_i (e^{i phi} sigma_i^- + e^{-i phi} sigma_i^+)
OperatorMatrix microwave_hamiltonian(const SystemDims& dims, double omega_d, double phase);

/// sum_i (shift_i / 2) sigma_i^z
OperatorMatrix stark_hamiltonian(const SystemDims& dims, const std::vector<double>& shifts);

/// Full frame Hamiltonian of one segment. Empty shifts skip the Stark term.
OperatorMatrix segment_hamiltonian(const SystemDims& dims, const IonGeometry& geom, const PulseSegment& seg,
                                   const std::vector<double>& stark_shifts = {});

/// Per ion sqrt(g_du)|d><u|, sqrt(g_ud)|u><d|, sqrt(g_ou)|o><u|, sqrt(g_od)|o><d| for nonzero rates,
/// then sqrt(g_heat) a^dag and sqrt(g_heat) a.
std::vector<OperatorMatrix> lindblad_operators(const SystemDims& dims, const NoiseModel& noise);

/// <psi| sum_k L_k^dag L_k |psi>: total decay rate out of psi.
double decay_rate(const std::vector<OperatorMatrix>& ops, const PureState& psi);

struct DecayRates {
  double all_up = 0.0;  // out of |up...up>
  double target = 0.0;  // out of |T> or |W>
  double mean = 0.0;
};

/// Closed forms for N ions:
///   all_up = N (g_du + g_ou),  target = (N-1)(g_du + g_ou) + (g_ud + g_od).
DecayRates decay_rates(const NoiseModel& noise, int n_ions);

}  // namespace zeno
