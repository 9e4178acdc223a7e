#include "zeno/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace zeno {

double PulseSchedule::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

void PulseSchedule::validate() const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.duration > 0.0) || !std::isfinite(s.duration))
      throw std::invalid_argument("segment " + std::to_string(i) + ": duration must be > 0");
    if (s.omega_d < 0.0) throw std::invalid_argument("segment " + std::to_string(i) + ": omega_d must be >= 0");
    if (!std::isfinite(s.omega_s) || !std::isfinite(s.omega_d) || !std::isfinite(s.delta))
      throw std::invalid_argument("segment " + std::to_string(i) + ": non-finite drive parameter");
  }
}

IonGeometry IonGeometry::two_ion_stretch() {
  const double a = 1.0 / std::sqrt(2.0);
  return {2, {0.0, 0.0}, {a, -a}};
}

IonGeometry IonGeometry::three_ion_com() {
  const double a = 1.0 / std::sqrt(3.0);
  return {3, {kTwoPi / 3.0, 0.0, -kTwoPi / 3.0}, {a, a, a}};
}

void IonGeometry::validate() const {
  if (n_ions != 2 && n_ions != 3) throw std::invalid_argument("geometry: n_ions must be 2 or 3");
  if (static_cast<int>(phase_per_ion.size()) != n_ions || static_cast<int>(mode_amplitudes.size()) != n_ions)
    throw std::invalid_argument("geometry: per-ion lists must have n_ions entries");
  double mx = 0.0;
  for (double a : mode_amplitudes) mx = std::max(mx, std::abs(a));
  if (mx == 0.0) throw std::invalid_argument("geometry: mode vector is zero");
}

std::vector<cplx> IonGeometry::coupling_weights() const {
  validate();
  double mx = 0.0;
  for (double a : mode_amplitudes) mx = std::max(mx, std::abs(a));
  std::vector<cplx> w(n_ions);
  for (int i = 0; i < n_ions; ++i) w[i] = (mode_amplitudes[i] / mx) * std::polar(1.0, phase_per_ion[i]);
  return w;
}

void NoiseModel::validate() const {
  for (double g : {gamma_du, gamma_ud, gamma_ou, gamma_od, gamma_heat, n_bar}) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("noise rates and n_bar must be finite and >= 0");
  }
  for (double s : stark_shifts)
    if (!std::isfinite(s)) throw std::invalid_argument("stark shift must be finite");
}

bool NoiseModel::has_dissipation() const {
  return gamma_du > 0.0 || gamma_ud > 0.0 || gamma_ou > 0.0 || gamma_od > 0.0 || gamma_heat > 0.0;
}

OperatorMatrix sideband_hamiltonian(const SystemDims& dims, const IonGeometry& geom, const PulseSegment& seg) {
  dims.validate();
  if (geom.n_ions != dims.n_ions) throw std::invalid_argument("geometry does not match system ion count");
  const std::vector<cplx> w = geom.coupling_weights();
  CMatrix h = CMatrix::Zero(dims.dim(), dims.dim());
  if (dims.n_fock >= 2) {
    h += seg.delta * build_mode_op(dims, ModeOp::number).matrix;
    if (seg.omega_s != 0.0) {
      CMatrix lower = CMatrix::Zero(dims.dim(), dims.dim());
      for (int i = 0; i < dims.n_ions; ++i) lower += w[i] * build_spin_op(dims, i, SpinOp::lower).matrix;
      const CMatrix a = build_mode_op(dims, ModeOp::annihilate).matrix;
      const CMatrix coupling = seg.omega_s * std::polar(1.0, seg.laser_phase) * lower * a;
      h += coupling + coupling.adjoint();
    }
  } else if (seg.omega_s != 0.0) {
    throw std::invalid_argument("sideband drive needs n_fock >= 2");
  }
  return {dims, std::move(h), true};
}

OperatorMatrix microwave_hamiltonian(const SystemDims& dims, double omega_d, double phase) {
  dims.validate();
  CMatrix h = CMatrix::Zero(dims.dim(), dims.dim());
  if (omega_d != 0.0) {
    const cplx e = std::polar(1.0, phase);
    for (int i = 0; i < dims.n_ions; ++i) {
      const CMatrix lower = build_spin_op(dims, i, SpinOp::lower).matrix;
      h += omega_d * (e * lower + std::conj(e) * lower.adjoint());
    }
  }
  return {dims, std::move(h), true};
}

OperatorMatrix stark_hamiltonian(const SystemDims& dims, const std::vector<double>& shifts) {
  dims.validate();
  if (static_cast<int>(shifts.size()) != dims.n_ions)
    throw std::invalid_argument("stark shifts need one entry per ion");
  CMatrix h = CMatrix::Zero(dims.dim(), dims.dim());
  for (int i = 0; i < dims.n_ions; ++i)
    if (shifts[i] != 0.0) h += 0.5 * shifts[i] * build_spin_op(dims, i, SpinOp::z).matrix;
  return {dims, std::move(h), true};
}

OperatorMatrix segment_hamiltonian(const SystemDims& dims, const IonGeometry& geom, const PulseSegment& seg,
                                   const std::vector<double>& stark_shifts) {
  OperatorMatrix h = sideband_hamiltonian(dims, geom, seg);
  h.matrix += microwave_hamiltonian(dims, seg.omega_d, seg.microwave_phase).matrix;
  if (!stark_shifts.empty()) h.matrix += stark_hamiltonian(dims, stark_shifts).matrix;
  return h;
}

std::vector<OperatorMatrix> lindblad_operators(const SystemDims& dims, const NoiseModel& noise) {
  dims.validate();
  noise.validate();
  if (noise.needs_leak_level() && !dims.leak_level)
    throw std::invalid_argument("decay into |o> requires the leak level");
  using enum SpinLevel;
  struct Channel {
    SpinLevel to, from;
    double rate;
  };
  const Channel channels[] = {
      {down, up, noise.gamma_du}, {up, down, noise.gamma_ud}, {out, up, noise.gamma_ou}, {out, down, noise.gamma_od}};
  std::vector<OperatorMatrix> ops;
  for (int i = 0; i < dims.n_ions; ++i) {
    for (const auto& c : channels) {
      if (c.rate <= 0.0) continue;
      OperatorMatrix l = spin_transition(dims, i, c.to, c.from);
      l.matrix *= std::sqrt(c.rate);
      ops.push_back(std::move(l));
    }
  }
  if (noise.gamma_heat > 0.0) {
    const double g = std::sqrt(noise.gamma_heat);
    OperatorMatrix up_op = build_mode_op(dims, ModeOp::create);
    OperatorMatrix down_op = build_mode_op(dims, ModeOp::annihilate);
    up_op.matrix *= g;
    down_op.matrix *= g;
    ops.push_back(std::move(up_op));
    ops.push_back(std::move(down_op));
  }
  return ops;
}

double decay_rate(const std::vector<OperatorMatrix>& ops, const PureState& psi) {
  double r = 0.0;
  for (const auto& l : ops) r += (l.matrix * psi.amplitudes).squaredNorm();
  return r;
}

DecayRates decay_rates(const NoiseModel& noise, int n_ions) {
  DecayRates d;
  d.all_up = n_ions * (noise.gamma_du + noise.gamma_ou);
  d.target = (n_ions - 1) * (noise.gamma_du + noise.gamma_ou) + (noise.gamma_ud + noise.gamma_od);
  d.mean = 0.5 * (d.all_up + d.target);
  return d;
}

}  // namespace zeno
