#pragma once

// Scenario runner behind the `run` command: resolves a configuration document,
// runs the named scenario and writes tab-separated tables and reports.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zeno/config.hpp"
#include "zeno/protocol.hpp"
#include "zeno/tomography.hpp"

namespace zeno {

enum class ScenarioKind { two_ion_single, two_ion_composite, three_ion_w, dressed_scan, tomography_demo, sweep };

ScenarioKind parse_scenario(const std::string& name);
std::string to_string(ScenarioKind kind);

struct ScanSettings {
  double omega_s = khz(17.6);
  double omega_d = 0.0;  // only enters the reported couplings
  double delta_min = -khz(80.0);
  double delta_max = khz(80.0);
  int points = 1601;
};

struct TomographySettings {
  bool enabled = false;
  std::string state = "simulated";  // simulated | ideal | mixed
  int n_ions = 2;                   // ideal and mixed states only
  long shots_reference = 6000;
  long shots_identity = 30000;
  long shots_rotation = 1500;
  int bins = 0;  // 0 picks 5 (two ions) or 7 (three)
  int resamples = 500;
  int sweep_points = 5;
  DetectionModel detection;
};

enum class SweepAxis { omega_ratio, t1, n_bar, gamma };

struct SweepRange {
  SweepAxis axis = SweepAxis::omega_ratio;
  double min = 0.0;
  double max = 0.0;
  int points = 1;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::two_ion_single;
  std::string preset;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int threads = 0;  // 0 uses the hardware concurrency

  ProtocolPlan plan;
  NoiseModel noise;
  SimOptions sim;
  double window = 1.0;  // trace length in units of the protocol duration
  std::vector<TuneParam> fine_tune;

  ScanSettings scan;
  TomographySettings tomography;
  std::vector<SweepRange> sweep;  // one or two axes
};

/// Built-in documents: fig2, fig3, fig_s4, fig_s6a, three_ion.
std::vector<std::string> preset_names();
std::string preset_document(const std::string& name);

/// Preset document (explicit name, else `run.preset` of the user document), then the
/// user document, then the overrides.
ConfigDocument compose_config(const ConfigDocument& user, const std::optional<std::string>& preset,
                              const std::vector<std::string>& overrides);

/// Throws ConfigError for unknown keys, bad units and inconsistent parameters.
ScenarioConfig resolve_config(const ConfigDocument& doc);

struct RunSummary {
  std::vector<std::string> files;
  std::optional<double> fidelity;  // protocol or tomography scenarios
};

/// Runs the scenario and writes its files into cfg.out_dir.
RunSummary run_scenario(const ScenarioConfig& cfg);

struct SweepPoint {
  std::vector<double> coords;
  double fidelity = 0.0;
};

/// End fidelity on the sweep grid, first axis slowest. Deterministic for any thread count.
std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg);

}  // namespace zeno
