#pragma once

// Pulse plans for the two-ion |T> and three-ion |W> protocols, analytic error
// budgets, simulated fidelities and derivative-free fine tuning.

#include <optional>
#include <string>
#include <vector>

#include "zeno/dynamics.hpp"

namespace zeno {

enum class Scheme { single, composite };

struct ProtocolPlan {
  Scheme scheme = Scheme::single;
  int m = 0;
  int n_ions = 2;
  double omega_s = 0.0;
  double omega_d = 0.0;
  double delta = 0.0;
  double t_pi = 0.0;
  double t1 = 0.0;  // composite: first segment; single: t_pi
  double t2 = 0.0;  // composite: second segment; single: 0

  double total_duration() const { return scheme == Scheme::composite ? t1 + t2 : t_pi; }
  void validate() const;
};

/// delta = +sqrt(7/3) Omega_s, Omega_d = (2/sqrt3) Omega_s / (sqrt2 (4m+1)), t_pi = pi / (2 sqrt2 Omega_d).
ProtocolPlan plan_single(double omega_s, int m);
/// Omega_d = Omega_s / (3 sqrt6 m), t1 = t_pi/3, t2 = 2 t_pi/3.
ProtocolPlan plan_composite(double omega_s, int m);
/// Resonant three-ion ladder: delta = 0, t_pi = pi / (2 sqrt3 Omega_d).
ProtocolPlan plan_three_ion(double omega_s, double omega_d);

/// Effective pi time for n ions: pi / (2 sqrt(n) Omega_d).
double effective_pi_time(int n_ions, double omega_d);
/// Replace Omega_d and rederive t_pi (and t1 = t_pi/3, t2 = 2 t_pi/3 for composite).
ProtocolPlan with_omega_d(ProtocolPlan plan, double omega_d);

/// Single: one segment of stretch * t_pi. Composite: (Omega_s, delta) for t1, then laser
/// phase pi and -delta for t2 + (stretch - 1) t_pi. The phase flip is the sign flip of Omega_s.
PulseSchedule make_schedule(const ProtocolPlan& plan, double stretch = 1.0);

IonGeometry plan_geometry(const ProtocolPlan& plan);
/// |T> for two ions, |W> for three.
NamedState plan_target(const ProtocolPlan& plan);
/// |uu> or |uuu>.
NamedState plan_initial(const ProtocolPlan& plan);

/// Equal split over the four spin channels so that 1 - exp(-Gamma_bar t) = deficit.
NoiseModel spontaneous_preset(int n_ions, double deficit, double t);

struct SimOptions {
  int n_fock = 8;
  bool leak_level = true;  // only used when the noise needs it
  double lindblad_tol = 1e-7;
  bool peak = false;       // maximum over [0, peak_window * t_total] instead of end value
  double peak_window = 1.25;
  int samples = 400;
};

struct SimResult {
  double fidelity = 0.0;  // target overlap at the end, or at the peak
  double time = 0.0;      // when it was attained
};

/// Pure evolution when the noise has no dissipation (thermal n_bar handled as an
/// incoherent sum over Fock states), Lindblad otherwise.
SimResult simulate_fidelity(const ProtocolPlan& plan, const NoiseModel& noise, const SimOptions& opts = {});

struct ProtocolTrace {
  PopulationRecord record;  // plan target first, then auxiliary states
  CMatrix qubit_state;      // spin state at total_duration() on the qubit register
};

/// Population traces over [0, window * t_total], `opts.samples` points per t_total.
/// Two ions also track S, uu, dd; three ions Wbar, uuu, ddd, Wc, Wac.
ProtocolTrace simulate_trace(const ProtocolPlan& plan, const NoiseModel& noise, const SimOptions& opts = {},
                             double window = 1.0);

/// Spin density (levels^N) mapped onto the 2^N qubit register; an ion in |o> reads as |down>.
CMatrix qubit_register_state(int n_ions, bool leak_level, const CMatrix& rho_spin);

struct ErrorBudget {
  double leakage = 0.0;
  double spontaneous = 0.0;
  double thermal = 0.0;
  double heating = 0.0;
  double stark = 0.0;
  double total_predicted = 0.0;  // 1 - prod(1 - entry)
};

/// leakage: 1/(4(1+2m)^2) single, (Omega_d/Omega_s)^4 composite, simulated for three ions;
/// spontaneous: 1 - exp(-Gamma_bar t_total); thermal: n_bar; heating and stark by
/// differential simulation.
ErrorBudget error_budget(const ProtocolPlan& plan, const NoiseModel& noise, const SimOptions& opts = {});

enum class TuneParam { omega_d, t1, t2, delta };

struct FineTuneResult {
  ProtocolPlan plan;
  double fidelity = 0.0;
  double start_fidelity = 0.0;
  bool improved = false;
  int evaluations = 0;
};

/// Noiseless end-fidelity maximization by cyclic golden-section line searches, each
/// parameter confined to +/- 20% of its starting value.
FineTuneResult fine_tune(const ProtocolPlan& plan, const std::vector<TuneParam>& free_params,
                         const SimOptions& opts = {});

struct Preset {
  std::string name;
  ProtocolPlan plan;
  NoiseModel noise;
  SimOptions sim;
};

/// fig2 (single pulse), fig3 (composite), three_ion. Throws std::invalid_argument otherwise.
Preset protocol_preset(const std::string& name);

}  // namespace zeno
