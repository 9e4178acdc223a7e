#pragma once

// Composite Hilbert space of N ions (two or three levels each) times one
// truncated harmonic mode.
//
// Basis ordering: ion 0 is the slowest index, the Fock index is the fastest.
// Within one ion the levels are ordered |up>, |down>, |o>. Everything else in
// the library goes through the accessors below instead of assuming this layout.

#include <span>
#include <string_view>
#include <vector>

#include "zeno/types.hpp"

namespace zeno {

enum class SpinLevel : int { up = 0, down = 1, out = 2 };

struct SystemDims {
  int n_ions = 2;
  int n_fock = 10;
  bool leak_level = false;

  int levels() const { return leak_level ? 3 : 2; }
  int spin_dim() const;
  int dim() const { return spin_dim() * n_fock; }

  /// Throws std::invalid_argument unless n_ions is 2 or 3 and n_fock >= 1.
  void validate() const;

  int spin_index(std::span<const SpinLevel> spins) const;
  Eigen::Index index(std::span<const SpinLevel> spins, int fock) const;
  Eigen::Index index(int spin_index, int fock) const { return Eigen::Index(spin_index) * n_fock + fock; }
  SpinLevel level_of(int spin_index, int ion) const;
  /// Number of ions in |up> for a spin configuration; -1 if any ion sits in |o>.
  int up_count(int spin_index) const;

  bool operator==(const SystemDims&) const = default;
};

struct PureState {
  SystemDims dims;
  CVector amplitudes;
};

struct DensityOperator {
  SystemDims dims;
  CMatrix matrix;
};

struct OperatorMatrix {
  SystemDims dims;
  CMatrix matrix;
  bool hermitian = false;
};

enum class SpinOp { lower, raise, x, z, project_o };
enum class ModeOp { annihilate, create, number };
enum class NamedState { uu, dd, T, S, W, Wbar, Wc, Wac, Wbar_c, Wbar_ac, uuu, ddd };

NamedState parse_named_state(std::string_view name);
std::string_view to_string(NamedState state);

/// Single-ion operator embedded by identity on every other factor.
/// lower = |down><up|, raise = |up><down|, x = lower + raise, z = |up><up| - |down><down|.
OperatorMatrix build_spin_op(const SystemDims& dims, int ion, SpinOp kind);

/// |to><from| on one ion.
OperatorMatrix spin_transition(const SystemDims& dims, int ion, SpinLevel to, SpinLevel from);

/// Truncated ladder operators; create is the adjoint of annihilate on the truncated space.
OperatorMatrix build_mode_op(const SystemDims& dims, ModeOp kind);

/// Spin-only vector (length levels^n_ions) of a named state.
CVector spin_state(int n_ions, bool leak_level, NamedState name);
CVector spin_state(const SystemDims& dims, NamedState name);

PureState product_state(const SystemDims& dims, const CVector& spin, int fock_n);
PureState named_state(const SystemDims& dims, NamedState name, int fock_n);

/// Thermal occupation probabilities renormalized over levels 0..n_fock-1.
/// Throws NumericalError if the discarded tail weight exceeds tail_limit.
std::vector<double> thermal_weights(double n_bar, int n_fock, double tail_limit = 1e-6);

DensityOperator thermal_product_state(const SystemDims& dims, const CVector& spin, double n_bar);
DensityOperator to_density(const PureState& state);

/// Partial trace over the motional mode.
CMatrix reduce_to_spin(const DensityOperator& rho);
CMatrix reduce_to_spin(const PureState& psi);

/// Throw NumericalError when the state invariants do not hold.
void check_state(const PureState& psi, double norm_tol = 1e-10);
void check_state(const DensityOperator& rho, double herm_tol = 1e-10, double trace_tol = 1e-9,
                 double eig_floor = -1e-9);

/// Total population in the highest Fock level.
double top_fock_population(const PureState& psi);
double top_fock_population(const DensityOperator& rho);

}  // namespace zeno
