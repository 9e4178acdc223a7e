#include "zeno/zeno.h"

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zeno/dressed.hpp"
#include "zeno/scenario.hpp"

struct zeno_config {
  zeno::ConfigDocument document;
  std::optional<std::string> preset;
  std::vector<std::string> overrides;
};

struct zeno_result {
  std::vector<std::string> files;
  std::optional<double> fidelity;
};

namespace {

thread_local std::string g_last_error;

template <class F>
zeno_status guarded(F f) {
  g_last_error.clear();
  try {
    f();
    return ZENO_OK;
  } catch (const zeno::ConfigError& e) {
    g_last_error = e.what();
    return ZENO_ERR_CONFIG;
  } catch (const zeno::FitError& e) {
    g_last_error = e.what();
    return ZENO_ERR_FIT;
  } catch (const zeno::NumericalError& e) {
    g_last_error = e.what();
    return ZENO_ERR_NUMERICAL;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return ZENO_ERR_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ZENO_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return ZENO_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

zeno::ScenarioConfig resolve(const zeno_config* cfg, const std::vector<std::string>& extra) {
  std::vector<std::string> overrides = cfg->overrides;
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  return zeno::resolve_config(zeno::compose_config(cfg->document, cfg->preset, overrides));
}

}  // namespace

extern "C" {

const char* zeno_version(void) { return "0.1.0"; }

const char* zeno_last_error(void) { return g_last_error.c_str(); }

zeno_status zeno_config_load(const char* path, zeno_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto cfg = std::make_unique<zeno_config>();
    cfg->document = zeno::ConfigDocument::load(path);
    *out = cfg.release();
  });
}

zeno_status zeno_config_parse(const char* text, zeno_config** out) {
  return guarded([&] {
    require(text && out, "null argument");
    auto cfg = std::make_unique<zeno_config>();
    cfg->document = zeno::ConfigDocument::parse(text);
    *out = cfg.release();
  });
}

zeno_status zeno_config_from_preset(const char* name, zeno_config** out) {
  return guarded([&] {
    require(name && out, "null argument");
    zeno::preset_document(name);
    auto cfg = std::make_unique<zeno_config>();
    cfg->preset = name;
    *out = cfg.release();
  });
}

void zeno_config_free(zeno_config* cfg) { delete cfg; }

zeno_status zeno_config_set_preset(zeno_config* cfg, const char* name) {
  return guarded([&] {
    require(cfg && name, "null argument");
    zeno::preset_document(name);
    cfg->preset = name;
  });
}

zeno_status zeno_config_override(zeno_config* cfg, const char* assignment) {
  return guarded([&] {
    require(cfg && assignment, "null argument");
    // check the syntax now so the caller sees the offending override
    zeno::ConfigDocument probe;
    probe.apply_override(assignment);
    cfg->overrides.emplace_back(assignment);
  });
}

zeno_status zeno_config_validate(const zeno_config* cfg) {
  return guarded([&] {
    require(cfg, "null argument");
    resolve(cfg, {});
  });
}

size_t zeno_preset_count(void) { return zeno::preset_names().size(); }

const char* zeno_preset_name(size_t index) {
  static const std::vector<std::string> names = zeno::preset_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

zeno_status zeno_run(const zeno_config* cfg, const char* out_dir, const uint64_t* seed, zeno_result** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    std::vector<std::string> extra;
    if (out_dir) extra.push_back(std::string("run.out=") + out_dir);
    if (seed) extra.push_back("run.seed=" + std::to_string(*seed));
    const zeno::ScenarioConfig sc = resolve(cfg, extra);
    const zeno::RunSummary summary = zeno::run_scenario(sc);
    auto r = std::make_unique<zeno_result>();
    r->files = summary.files;
    r->fidelity = summary.fidelity;
    *out = r.release();
  });
}

void zeno_result_free(zeno_result* result) { delete result; }

size_t zeno_result_file_count(const zeno_result* result) { return result ? result->files.size() : 0; }

const char* zeno_result_file(const zeno_result* result, size_t index) {
  if (!result || index >= result->files.size()) return nullptr;
  return result->files[index].c_str();
}

zeno_status zeno_result_fidelity(const zeno_result* result, double* fidelity) {
  return guarded([&] {
    require(result && fidelity, "null argument");
    require(result->fidelity.has_value(), "scenario reports no fidelity");
    *fidelity = *result->fidelity;
  });
}

zeno_status zeno_dressed_spectrum(double omega_s, double delta, double omega_d, double* eigenfrequencies,
                                  double* couplings) {
  return guarded([&] {
    const zeno::DressedSpectrum s = zeno::dressed_spectrum(omega_s, delta, omega_d);
    for (int n = 0; n < 3 && eigenfrequencies; ++n) eigenfrequencies[n] = s.eigenfrequencies[n];
    for (int n = 0; n < 4 && couplings; ++n) couplings[n] = s.couplings[n];
  });
}

zeno_status zeno_plan(int scheme, double omega_s, int m, double* omega_d, double* delta, double* t_pi) {
  return guarded([&] {
    require(scheme == 0 || scheme == 1, "scheme must be 0 (single) or 1 (composite)");
    const zeno::ProtocolPlan p = scheme == 0 ? zeno::plan_single(omega_s, m) : zeno::plan_composite(omega_s, m);
    if (omega_d) *omega_d = p.omega_d;
    if (delta) *delta = p.delta;
    if (t_pi) *t_pi = p.t_pi;
  });
}

zeno_status zeno_two_ion_fidelity(int scheme, double omega_s, double omega_d, double delta, double t1, double t2,
                                  double* fidelity) {
  return guarded([&] {
    require(fidelity, "null argument");
    require(scheme == 0 || scheme == 1, "scheme must be 0 (single) or 1 (composite)");
    zeno::ProtocolPlan p;
    p.scheme = scheme == 0 ? zeno::Scheme::single : zeno::Scheme::composite;
    p.omega_s = omega_s;
    p.omega_d = omega_d;
    p.delta = delta;
    p.t1 = t1;
    p.t2 = scheme == 0 ? 0.0 : t2;
    p.t_pi = t1 + p.t2;
    *fidelity = zeno::simulate_fidelity(p, zeno::NoiseModel{}).fidelity;
  });
}

zeno_status zeno_histogram_summary(const char* path, long* shots, double* mean_count) {
  return guarded([&] {
    require(path, "null argument");
    std::ifstream f(path);
    if (!f) throw zeno::ConfigError(std::string("cannot open histogram '") + path + "'");
    const zeno::CountHistogram h = zeno::read_histogram(f);
    if (shots) *shots = h.shots;
    if (mean_count) {
      double s = 0.0;
      for (const auto& [c, n] : h.counts) s += static_cast<double>(c) * static_cast<double>(n);
      *mean_count = h.shots > 0 ? s / static_cast<double>(h.shots) : 0.0;
    }
  });
}

}  // extern "C"
