#pragma once

// Fluorescence readout simulation and maximum-likelihood partial tomography:
// reference histograms, information-preserving rebinning, alternating
// EM / RrhoR fit, parametric bootstrap and the reference-preparation sweep.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zeno/hilbert.hpp"

namespace zeno {

struct DetectionModel {
  double bright_mean = 39.0;  // photons per bright ion per window
  double dark_mean = 3.0;
  double pump_prob = 0.02;    // chance a bright ion depumps at a uniform time in the window
  double window = 330e-6;     // seconds, descriptive

  void validate() const;
};

struct CountHistogram {
  std::map<int, long> counts;  // photon count -> occurrences
  long shots = 0;
  std::string label;
  /// Per-shot photon counts in acquisition order, when known.
  std::vector<int> sequence;

  void add(int count, long n = 1);
  void validate() const;
  int max_count() const;
};

void write_histogram(std::ostream& os, const CountHistogram& h);
/// Lines `<count> <occurrences>`, headers `# shots=<n>` and `# label=<tag>`. Throws ConfigError.
CountHistogram read_histogram(std::istream& is);

/// Deterministic 64-bit mixer; seeds independent streams from (seed, index).
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

/// bright_probabilities[k] = P(exactly k ions bright). Sequence is recorded.
CountHistogram simulate_histogram(const std::vector<double>& bright_probabilities, const DetectionModel& model,
                                  long shots, std::uint64_t seed);

/// Single-qubit rotation exp(-i theta/2 (cos phi X + sin phi Y)), basis (|up>, |down>).
Eigen::Matrix2cd rotation(double theta, double phi);
/// Same rotation on every ion of an n-ion qubit register.
CMatrix global_rotation(int n_ions, double theta, double phi);

/// Class probabilities of a reference shot: each ion starts bright-ready with probability
/// 1 - epsilon (else dark), then {3pi/2, 0}-{pi/2, phase}. Binomial in the per-ion probability.
std::vector<double> reference_class_probabilities(int n_ions, double phase, double epsilon = 0.0);

struct ReferenceSet {
  std::vector<double> phases;
  std::vector<CountHistogram> histograms;
};

/// Phases N pi/4, N = 0..7.
std::vector<double> reference_phases();
ReferenceSet reference_protocol(const DetectionModel& model, long shots_per_phase, int n_ions, std::uint64_t seed);

/// First ceil(fraction * shots) shots (by sequence), and the rest. Without a recorded
/// sequence a fixed-seed hypergeometric split is used.
std::pair<CountHistogram, CountHistogram> split_held_out(const CountHistogram& h, double fraction = 0.1);

struct BinnedHistogram {
  std::vector<int> boundaries;  // ascending cut points; bin j = [b_{j-1}, b_j)
  std::vector<long> bin_counts;
  long shots = 0;
};

BinnedHistogram rebin(const CountHistogram& h, const std::vector<int>& boundaries);

struct BinChoice {
  std::vector<int> boundaries;
  double information = 0.0;       // I(class; bin) in nats, uniform class prior
  double full_information = 0.0;  // same at full resolution
};

/// Maximizes I(class; bin) over contiguous partitions by dynamic programming; class
/// count distributions are unmixed from the held-out references. Ties keep boundaries low.
/// Throws FitError when a class has fewer than 100 effective held-out shots.
BinChoice choose_bins(const ReferenceSet& held_out, int n_ions, int n_bins);

struct MeasurementDesign {
  int n_ions = 2;
  std::vector<std::pair<double, double>> rotations;  // (theta, phi); (0, 0) is identity
  std::vector<CMatrix> unitaries;
  /// povm[n] projects onto exactly n ions bright (up).
  std::vector<CMatrix> povm;
  CVector target;
  /// coefficients[i][n]: fidelity = sum c_in tr(A_n U_i rho U_i^dag).
  std::vector<std::vector<double>> coefficients;
  double residual = 0.0;
};

/// Identity plus (theta, pi N/10), N = 0..19, theta = pi/2 (two ions) or arccos(1/3) (three).
/// Throws NumericalError if the target projector is not in the span.
MeasurementDesign analysis_design(int n_ions, NamedState target);

/// probs[i][n] = tr(A_n U_i rho U_i^dag) on the qubit register.
std::vector<std::vector<double>> predicted_classes(const MeasurementDesign& design, const CMatrix& rho);
double linear_fidelity(const MeasurementDesign& design, const std::vector<std::vector<double>>& probs);

/// One data histogram per design rotation.
std::vector<CountHistogram> simulate_data(const MeasurementDesign& design, const CMatrix& rho,
                                          const DetectionModel& model, long shots_identity,
                                          long shots_per_rotation, std::uint64_t seed);

struct FitInputs {
  int n_ions = 2;
  ReferenceSet references;                 // analysis part (held-out shots removed)
  std::vector<CountHistogram> data;        // aligned with design.rotations
  MeasurementDesign design;
  std::vector<int> boundaries;
  double reference_epsilon = 0.0;
};

struct FitOptions {
  double rel_tol = 1e-10;
  int max_outer = 5000;
};

struct TomographyEstimate {
  CMatrix rho_ml;
  double fidelity = 0.0;
  std::vector<double> populations;
  std::optional<double> ci_lower;
  std::optional<double> ci_upper;
  double epsilon_0 = 0.0;
  double epsilon_syst = 0.0;
  std::optional<double> lr_percentile;
  double log_likelihood = 0.0;
  double llr_saturated = 0.0;  // 2 sum n log(freq / model)
  std::vector<std::vector<double>> bin_distributions;  // [class][bin]
  std::vector<double> likelihood_trace;                // after every outer iteration
  int iterations = 0;
  bool converged = false;
  int resamples = 0;
};

/// Alternating maximization: EM update of the class bin distributions with rho fixed,
/// then an RrhoR step on rho (diluted when a plain step lowers the likelihood).
TomographyEstimate fit_ml(const FitInputs& inputs, const FitOptions& opts = {},
                          const TomographyEstimate* warm_start = nullptr);

/// Parametric bootstrap: resample every binned histogram from the fitted model, refit,
/// and set epsilon_0 = (q84 - q16)/2, the interval and the likelihood-ratio percentile.
/// resamples = 0 returns the estimate unchanged.
TomographyEstimate bootstrap(const FitInputs& inputs, const TomographyEstimate& estimate, int resamples,
                             std::uint64_t seed, const FitOptions& opts = {}, int threads = 0);

struct SweepResult {
  std::vector<double> epsilons;
  std::vector<double> infidelities;
  double slope = 0.0;
  double intercept = 0.0;
  double epsilon_syst = 0.0;  // slope * epsilon_max
  bool nonlinear = false;     // some point deviates from the line by > 20% of its span
};

/// Refit with mixed reference preparations for epsilon in [0, epsilon_hi].
SweepResult systematic_sweep(const FitInputs& inputs, const TomographyEstimate& baseline, int n_points,
                             double epsilon_hi = 0.002, double epsilon_max = 0.001, const FitOptions& opts = {});

/// Interval [F - eps0 - eps_syst, F + eps0] once bootstrap and sweep have run.
void apply_interval(TomographyEstimate& est);

/// JSON document with fidelity, ci, populations, lr_percentile, epsilon_syst.
std::string estimate_json(const TomographyEstimate& est);

}  // namespace zeno
