#pragma once

// Restriction of the three-ion COM-mode Hamiltonians to the ladder that carries
// the |uuu> -> |W> protocol and its first sideband-coupled neighbour.

#include <string>
#include <vector>

#include "zeno/model.hpp"

namespace zeno {

struct LadderState {
  std::string label;  // e.g. "W,0"
  NamedState spin;
  int fock = 0;
};

struct ThreeIonLadder {
  /// |uuu,0>, |W,0>, |Wbar,0>, |Wc,1>, |ddd,0>, |Wac,1>, |Wbar_c,1>
  std::vector<LadderState> states;
  CMatrix sideband;   // <a|H_s'|b> over `states`
  CMatrix microwave;  // <a|H_d'|b> over `states`
  /// || H_s' |W,0> || and || H_s' |uuu,0> || in the full space.
  double w_dark_residual = 0.0;
  double uuu_dark_residual = 0.0;
};

/// Throws std::invalid_argument unless geom is the canonical COM geometry (2 pi/3 phase steps).
ThreeIonLadder three_ion_ladder(double omega_s, double omega_d, double delta = 0.0,
                                const IonGeometry& geom = IonGeometry::three_ion_com(), int n_fock = 4);

}  // namespace zeno
