#include "zeno/three_ion.hpp"

#include <cmath>

namespace zeno {

namespace {

void check_com_geometry(const IonGeometry& geom) {
  geom.validate();
  if (geom.n_ions != 3) throw std::invalid_argument("three-ion ladder needs a three-ion geometry");
  const std::vector<cplx> w = geom.coupling_weights();
  // uniform mode amplitudes and phases advancing by -2 pi/3 from ion to ion
  const cplx step = std::polar(1.0, -kTwoPi / 3.0);
  for (int i = 0; i < 2; ++i) {
    if (std::abs(w[i + 1] - w[i] * step) > 1e-9)
      throw std::invalid_argument("three-ion ladder needs the canonical COM geometry");
  }
}

}  // namespace

ThreeIonLadder three_ion_ladder(double omega_s, double omega_d, double delta, const IonGeometry& geom, int n_fock) {
  check_com_geometry(geom);
  if (n_fock < 3) throw std::invalid_argument("three-ion ladder needs n_fock >= 3");
  const SystemDims dims{3, n_fock, false};

  ThreeIonLadder out;
  out.states = {
      {"uuu,0", NamedState::uuu, 0},   {"W,0", NamedState::W, 0},         {"Wbar,0", NamedState::Wbar, 0},
      {"Wc,1", NamedState::Wc, 1},     {"ddd,0", NamedState::ddd, 0},     {"Wac,1", NamedState::Wac, 1},
      {"Wbar_c,1", NamedState::Wbar_c, 1},
  };

  PulseSegment seg;
  seg.omega_s = omega_s;
  seg.delta = delta;
  const CMatrix hs = sideband_hamiltonian(dims, geom, seg).matrix;
  const CMatrix hd = microwave_hamiltonian(dims, omega_d, 0.0).matrix;

  const int n = static_cast<int>(out.states.size());
  CMatrix basis(dims.dim(), n);
  for (int j = 0; j < n; ++j) basis.col(j) = named_state(dims, out.states[j].spin, out.states[j].fock).amplitudes;
  out.sideband = basis.adjoint() * hs * basis;
  out.microwave = basis.adjoint() * hd * basis;

  PulseSegment resonant = seg;
  resonant.delta = 0.0;
  const CMatrix hs0 = sideband_hamiltonian(dims, geom, resonant).matrix;
  out.w_dark_residual = (hs0 * basis.col(1)).norm();
  out.uuu_dark_residual = (hs0 * basis.col(0)).norm();
  return out;
}

}  // namespace zeno
