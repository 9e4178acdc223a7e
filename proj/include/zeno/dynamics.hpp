#pragma once

// Time evolution under a PulseSchedule: exact per-segment exponentials for
// pure states, fixed-step RK4 with a step-halving check for the Lindblad
// master equation.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zeno/model.hpp"

namespace zeno {

struct PureTrajectory {
  std::vector<double> times;
  std::vector<PureState> states;
  PulseSchedule schedule;
};

struct DensityTrajectory {
  std::vector<double> times;
  std::vector<DensityOperator> states;
  PulseSchedule schedule;
};

struct EvolveOptions {
  double sample_dt = 0.0;  // <= 0 selects total_duration / 400
  std::vector<double> stark_shifts;
  double truncation_limit = 1e-8;
};

/// exp(-i H t) applied through a cached eigendecomposition of a Hermitian H.
class SegmentPropagator {
 public:
  explicit SegmentPropagator(const CMatrix& hamiltonian);
  CVector apply(const CVector& psi, double t) const;
  CMatrix unitary(double t) const;
  double max_abs_eigenvalue() const;

 private:
  Eigen::VectorXd energies_;
  CMatrix vectors_;
};

/// Sample times: every sample_dt from 0 plus every segment boundary, sorted and merged
/// when closer than 1e-12 of the total duration.
std::vector<double> sample_times(const PulseSchedule& schedule, double sample_dt);

using PureObserver = std::function<void(double, const PureState&)>;
using DensityObserver = std::function<void(double, const DensityOperator&)>;

/// Throws std::invalid_argument for sample_dt < 0 or a non-normalized initial state,
/// TruncationError when the top Fock level exceeds the limit at a sample.
void evolve_pure(const PulseSchedule& schedule, const SystemDims& dims, const IonGeometry& geom,
                 const PureState& initial, const EvolveOptions& opts, const PureObserver& observer);
PureTrajectory evolve_pure(const PulseSchedule& schedule, const SystemDims& dims, const IonGeometry& geom,
                           const PureState& initial, const EvolveOptions& opts = {});
/// Final state only; no sampling.
PureState propagate_pure(const PulseSchedule& schedule, const SystemDims& dims, const IonGeometry& geom,
                         const PureState& initial, const std::vector<double>& stark_shifts = {});

struct LindbladOptions {
  double tol = 1e-6;  // max entrywise coarse/fine discrepancy per sample interval
  double sample_dt = 0.0;
  double truncation_limit = 1e-8;
  double positivity_floor = -1e-7;
  double trace_tol = 1e-8;
  int max_halvings = 6;
};

struct LindbladStats {
  double initial_step = 0.0;
  double final_step = 0.0;
  int halvings = 0;
  long steps = 0;
  double max_discrepancy = 0.0;
};

/// Stark shifts come from noise.stark_shifts. The observer sees the fine (h/2) solution.
/// Throws ConvergenceError if halving cannot reach tol, NumericalError on trace or
/// positivity violations, TruncationError on Fock overflow.
LindbladStats evolve_density(const PulseSchedule& schedule, const SystemDims& dims, const IonGeometry& geom,
                             const NoiseModel& noise, const DensityOperator& initial, const LindbladOptions& opts,
                             const DensityObserver& observer);
DensityTrajectory evolve_density(const PulseSchedule& schedule, const SystemDims& dims, const IonGeometry& geom,
                                 const NoiseModel& noise, const DensityOperator& initial,
                                 const LindbladOptions& opts = {});

/// A population to record: overlap with |spin> (x |fock> when given, else traced over motion).
struct PopulationTarget {
  std::string name;
  CVector spin;
  std::optional<int> fock;
};

PopulationTarget named_target(const SystemDims& dims, NamedState name, std::optional<int> fock = std::nullopt);

struct PopulationSample {
  std::vector<double> p_up;     // P_0..P_N, exactly k ions up
  double leakage = 0.0;         // any ion in |o>
  std::vector<double> targets;  // one per PopulationTarget
};

PopulationSample measure(const PureState& psi, const std::vector<PopulationTarget>& targets);
PopulationSample measure(const DensityOperator& rho, const std::vector<PopulationTarget>& targets);
PopulationSample measure_spin(const SystemDims& dims, const CMatrix& rho_spin,
                              const std::vector<PopulationTarget>& targets);

struct PopulationRecord {
  std::vector<double> times;
  std::vector<std::string> target_names;
  std::vector<PopulationSample> samples;
};

PopulationRecord extract_populations(const PureTrajectory& traj, const std::vector<PopulationTarget>& targets);
PopulationRecord extract_populations(const DensityTrajectory& traj, const std::vector<PopulationTarget>& targets);

}  // namespace zeno
