#include "zeno/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "zeno/dressed.hpp"

namespace zeno {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "run.scenario", "run.preset", "run.seed", "run.out", "run.threads", "run.n_fock", "run.samples",
      "run.window", "run.peak", "run.lindblad_tol",
      "drive.preset", "drive.scheme", "drive.omega_s", "drive.omega_d", "drive.delta", "drive.m", "drive.t1",
      "drive.t2", "drive.fine_tune",
      "noise.preset", "noise.spontaneous_deficit", "noise.gamma_du", "noise.gamma_ud", "noise.gamma_ou",
      "noise.gamma_od", "noise.gamma_heat", "noise.n_bar", "noise.stark",
      "scan.omega_s", "scan.omega_d", "scan.delta_min", "scan.delta_max", "scan.points",
      "tomography.enabled", "tomography.state", "tomography.ions", "tomography.shots_reference",
      "tomography.shots_identity", "tomography.shots_rotation", "tomography.bins", "tomography.resamples",
      "tomography.sweep_points", "tomography.bright_mean", "tomography.dark_mean", "tomography.pump_prob",
      "sweep.axis", "sweep.min", "sweep.max", "sweep.points", "sweep.axis2", "sweep.min2", "sweep.max2",
      "sweep.points2"};
  return keys;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x + 0.0);  // no "-0"
  return buf;
}

std::string scheme_name(const ProtocolPlan& p) {
  if (p.n_ions == 3) return "three_ion";
  return p.scheme == Scheme::single ? "single" : "composite";
}

std::string axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::omega_ratio: return "omega_ratio";
    case SweepAxis::t1: return "t1";
    case SweepAxis::n_bar: return "n_bar";
    case SweepAxis::gamma: return "gamma";
  }
  return "?";
}

const char* param_name(TuneParam p) {
  switch (p) {
    case TuneParam::omega_d: return "omega_d";
    case TuneParam::t1: return "t1";
    case TuneParam::t2: return "t2";
    case TuneParam::delta: return "delta";
  }
  return "?";
}

// Runs f and turns argument errors into a positioned configuration error.
template <class F>
auto checked(const ConfigEntry* e, const std::string& what, F f) {
  try {
    return f();
  } catch (const std::invalid_argument& ex) {
    const std::string msg = what + ": " + ex.what();
    if (e) throw entry_error(*e, msg);
    throw ConfigError(msg);
  }
}

class Reader {
 public:
  explicit Reader(const ConfigDocument& doc) : doc_(doc) {}
  const ConfigEntry* find(const std::string& key) const { return doc_.has(key) ? &doc_.at(key) : nullptr; }

  template <class F>
  auto get(const std::string& key, F parse, decltype(parse(std::declval<const ConfigEntry&>())) fallback) const {
    const ConfigEntry* e = find(key);
    return e ? parse(*e) : fallback;
  }

 private:
  const ConfigDocument& doc_;
};

std::string str(const ConfigEntry& e) { return e.value; }

int positive_int(const ConfigEntry& e, long lo = 1) {
  const long v = parse_integer(e);
  if (v < lo) throw entry_error(e, "must be >= " + std::to_string(lo));
  return static_cast<int>(v);
}

SweepAxis parse_axis(const ConfigEntry& e) {
  if (e.value == "omega_ratio") return SweepAxis::omega_ratio;
  if (e.value == "t1") return SweepAxis::t1;
  if (e.value == "n_bar") return SweepAxis::n_bar;
  if (e.value == "gamma") return SweepAxis::gamma;
  throw entry_error(e, "unknown sweep axis '" + e.value + "' (omega_ratio, t1, n_bar, gamma)");
}

double axis_value(SweepAxis a, const ConfigEntry& e) {
  const double v = a == SweepAxis::gamma ? parse_rate(e) : parse_number(e);
  if (v < 0.0) throw entry_error(e, "sweep bound must be >= 0");
  return v;
}

ProtocolPlan build_plan(Scheme scheme, int n_ions, double omega_s, int m, std::optional<double> omega_d,
                        const ConfigEntry* where) {
  return checked(where, "invalid drive", [&] {
    if (n_ions == 3) {
      if (!omega_d) throw ConfigError("three-ion plans need drive.omega_d");
      return plan_three_ion(omega_s, *omega_d);
    }
    return scheme == Scheme::single ? plan_single(omega_s, m) : plan_composite(omega_s, m);
  });
}

}  // namespace

ScenarioKind parse_scenario(const std::string& name) {
  if (name == "two_ion_single") return ScenarioKind::two_ion_single;
  if (name == "two_ion_composite") return ScenarioKind::two_ion_composite;
  if (name == "three_ion_w") return ScenarioKind::three_ion_w;
  if (name == "dressed_scan") return ScenarioKind::dressed_scan;
  if (name == "tomography_demo") return ScenarioKind::tomography_demo;
  if (name == "sweep") return ScenarioKind::sweep;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::two_ion_single: return "two_ion_single";
    case ScenarioKind::two_ion_composite: return "two_ion_composite";
    case ScenarioKind::three_ion_w: return "three_ion_w";
    case ScenarioKind::dressed_scan: return "dressed_scan";
    case ScenarioKind::tomography_demo: return "tomography_demo";
    case ScenarioKind::sweep: return "sweep";
  }
  return "?";
}

std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig_s4", "fig_s6a", "three_ion"}; }

std::string preset_document(const std::string& name) {
  if (name == "fig2")
    return "[run]\nscenario = two_ion_single\nwindow = 1.5\n[drive]\npreset = fig2\n[noise]\npreset = fig2\n";
  if (name == "fig3")
    return "[run]\nscenario = two_ion_composite\nwindow = 1.25\n[drive]\npreset = fig3\n[noise]\npreset = fig3\n";
  if (name == "three_ion")
    return "[run]\nscenario = three_ion_w\nwindow = 1.25\npeak = true\n[drive]\npreset = three_ion\n"
           "[noise]\npreset = three_ion\n";
  if (name == "fig_s4")
    return "[run]\nscenario = dressed_scan\n[scan]\nomega_s = 17.6 kHz\ndelta_min = -80 kHz\n"
           "delta_max = 80 kHz\npoints = 1601\n";
  if (name == "fig_s6a")
    return "[run]\nscenario = sweep\n[drive]\nscheme = single\nomega_s = 17.6 kHz\nm = 1\n"
           "[sweep]\naxis = omega_ratio\nmin = 3\nmax = 16\npoints = 261\n";
  throw ConfigError("unknown preset '" + name + "'");
}

ConfigDocument compose_config(const ConfigDocument& user, const std::optional<std::string>& preset,
                              const std::vector<std::string>& overrides) {
  std::optional<std::string> name = preset;
  if (!name && user.has("run.preset")) name = user.at("run.preset").value;
  ConfigDocument out;
  if (name) {
    try {
      out = ConfigDocument::parse(preset_document(*name), "preset:" + *name);
    } catch (const ConfigError& e) {
      if (!preset && user.has("run.preset")) throw entry_error(user.at("run.preset"), e.what());
      throw;
    }
  }
  out.merge(user);
  if (preset) out.apply_override("run.preset=" + *preset);
  for (const auto& o : overrides) out.apply_override(o);
  return out;
}

ScenarioConfig resolve_config(const ConfigDocument& doc) {
  for (const auto& [key, e] : doc.entries())
    if (!known_keys().count(key)) throw ConfigError(e.source + ": unknown key '" + key + "'", e.line, e.key_column);

  const Reader r(doc);
  ScenarioConfig c;
  const ConfigEntry& sc = doc.at("run.scenario");
  c.scenario = checked(&sc, "run.scenario", [&] { return parse_scenario(sc.value); });
  c.preset = r.get("run.preset", str, std::string{});
  if (const ConfigEntry* e = r.find("run.seed")) {
    const long v = parse_integer(*e);
    if (v < 0) throw entry_error(*e, "seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(v);
  }
  c.out_dir = r.get("run.out", str, c.out_dir);
  if (const ConfigEntry* e = r.find("run.threads")) c.threads = positive_int(*e, 0);
  if (const ConfigEntry* e = r.find("run.n_fock")) c.sim.n_fock = positive_int(*e, 2);
  if (const ConfigEntry* e = r.find("run.samples")) c.sim.samples = positive_int(*e, 2);
  c.sim.peak = r.get("run.peak", parse_bool, false);
  if (const ConfigEntry* e = r.find("run.lindblad_tol")) {
    c.sim.lindblad_tol = parse_number(*e);
    if (!(c.sim.lindblad_tol > 0.0)) throw entry_error(*e, "tolerance must be > 0");
  }
  if (const ConfigEntry* e = r.find("run.window")) {
    c.window = parse_number(*e);
    if (!(c.window >= 1.0 && c.window <= 10.0)) throw entry_error(*e, "window must be in [1, 10]");
  }
  c.sim.peak_window = c.window;

  // drive
  Scheme scheme = Scheme::single;
  int n_ions = 2;
  std::string wanted;
  switch (c.scenario) {
    case ScenarioKind::two_ion_single: wanted = "single"; break;
    case ScenarioKind::two_ion_composite: wanted = "composite"; break;
    case ScenarioKind::three_ion_w: wanted = "three_ion"; break;
    default: wanted = r.get("drive.scheme", str, std::string("single"));
  }
  if (const ConfigEntry* e = r.find("drive.scheme"); e && e->value != wanted)
    throw entry_error(*e, "scheme '" + e->value + "' conflicts with scenario " + to_string(c.scenario));
  if (wanted == "composite") {
    scheme = Scheme::composite;
  } else if (wanted == "three_ion") {
    n_ions = 3;
  } else if (wanted != "single") {
    throw entry_error(doc.at("drive.scheme"), "unknown scheme '" + wanted + "' (single, composite, three_ion)");
  }

  const bool needs_plan = c.scenario != ScenarioKind::dressed_scan &&
                          !(c.scenario == ScenarioKind::tomography_demo &&
                            r.get("tomography.state", str, std::string("simulated")) != "simulated");
  std::optional<ProtocolPlan> plan;
  if (const ConfigEntry* e = r.find("drive.preset")) {
    const Preset p = checked(e, "drive.preset", [&] { return protocol_preset(e->value); });
    if (scheme_name(p.plan) != wanted)
      throw entry_error(*e, "drive preset '" + e->value + "' is a " + scheme_name(p.plan) + " plan, scenario needs " +
                                wanted);
    plan = p.plan;
  }
  const ConfigEntry* e_os = r.find("drive.omega_s");
  const ConfigEntry* e_m = r.find("drive.m");
  const ConfigEntry* e_od = r.find("drive.omega_d");
  std::optional<double> omega_d;
  if (e_od) omega_d = parse_frequency(*e_od);
  if (e_os || e_m || (!plan && needs_plan)) {
    if (!e_os && !plan) throw ConfigError("missing required key 'drive.omega_s'");
    const double omega_s = e_os ? parse_frequency(*e_os) : plan->omega_s;
    const int m = e_m ? positive_int(*e_m, 0) : (plan ? plan->m : 1);
    if (n_ions == 3 && !omega_d && plan) omega_d = plan->omega_d;
    plan = build_plan(scheme, n_ions, omega_s, m, omega_d, e_os ? e_os : e_m);
  }
  if (plan) {
    if (omega_d) *plan = checked(e_od, "drive.omega_d", [&] { return with_omega_d(*plan, *omega_d); });
    if (const ConfigEntry* e = r.find("drive.delta")) plan->delta = parse_frequency(*e);
    for (const char* key : {"drive.t1", "drive.t2"}) {
      const ConfigEntry* e = r.find(key);
      if (!e) continue;
      if (plan->scheme != Scheme::composite) throw entry_error(*e, std::string(key) + " applies to composite plans");
      (std::string(key) == "drive.t1" ? plan->t1 : plan->t2) = parse_time(*e);
    }
    if (plan->scheme == Scheme::composite) plan->t_pi = plan->t1 + plan->t2;
    checked(e_os, "invalid drive", [&] {
      plan->validate();
      return 0;
    });
    c.plan = *plan;
  }
  if (const ConfigEntry* e = r.find("drive.fine_tune")) {
    for (const auto& name : split_list(*e)) {
      if (name == "omega_d") c.fine_tune.push_back(TuneParam::omega_d);
      else if (name == "t1") c.fine_tune.push_back(TuneParam::t1);
      else if (name == "t2") c.fine_tune.push_back(TuneParam::t2);
      else if (name == "delta") c.fine_tune.push_back(TuneParam::delta);
      else throw entry_error(*e, "unknown fine-tune parameter '" + name + "'");
    }
  }

  // noise
  if (const ConfigEntry* e = r.find("noise.preset"); e && e->value != "none") {
    const Preset p = checked(e, "noise.preset", [&] { return protocol_preset(e->value); });
    if (p.plan.n_ions != n_ions)
      throw entry_error(*e, "noise preset '" + e->value + "' is for " + std::to_string(p.plan.n_ions) + " ions");
    c.noise = p.noise;
  }
  if (const ConfigEntry* e = r.find("noise.spontaneous_deficit")) {
    const double d = parse_number(*e);
    const NoiseModel s = checked(e, "noise.spontaneous_deficit",
                                 [&] { return spontaneous_preset(n_ions, d, c.plan.total_duration()); });
    c.noise.gamma_du = s.gamma_du;
    c.noise.gamma_ud = s.gamma_ud;
    c.noise.gamma_ou = s.gamma_ou;
    c.noise.gamma_od = s.gamma_od;
  }
  for (auto [key, field] : {std::pair{"noise.gamma_du", &c.noise.gamma_du}, std::pair{"noise.gamma_ud", &c.noise.gamma_ud},
                            std::pair{"noise.gamma_ou", &c.noise.gamma_ou}, std::pair{"noise.gamma_od", &c.noise.gamma_od},
                            std::pair{"noise.gamma_heat", &c.noise.gamma_heat}})
    if (const ConfigEntry* e = r.find(key)) *field = parse_rate(*e);
  if (const ConfigEntry* e = r.find("noise.n_bar")) c.noise.n_bar = parse_number(*e);
  if (const ConfigEntry* e = r.find("noise.stark")) {
    c.noise.stark_shifts = parse_frequency_list(*e);
    if (static_cast<int>(c.noise.stark_shifts.size()) != n_ions)
      throw entry_error(*e, "need one Stark shift per ion (" + std::to_string(n_ions) + ")");
  }
  checked(r.find("noise.preset"), "invalid noise", [&] {
    c.noise.validate();
    return 0;
  });

  // dressed scan
  if (const ConfigEntry* e = r.find("scan.omega_s")) c.scan.omega_s = parse_frequency(*e);
  if (const ConfigEntry* e = r.find("scan.omega_d")) c.scan.omega_d = parse_frequency(*e);
  if (const ConfigEntry* e = r.find("scan.delta_min")) c.scan.delta_min = parse_frequency(*e);
  if (const ConfigEntry* e = r.find("scan.delta_max")) c.scan.delta_max = parse_frequency(*e);
  if (const ConfigEntry* e = r.find("scan.points")) c.scan.points = positive_int(*e, 2);
  if (c.scenario == ScenarioKind::dressed_scan) {
    if (!(c.scan.delta_max > c.scan.delta_min)) throw ConfigError("scan needs delta_max > delta_min");
    if (c.scan.omega_s == 0.0) throw ConfigError("scan needs omega_s != 0");
  }

  // tomography
  auto& t = c.tomography;
  t.enabled = c.scenario == ScenarioKind::tomography_demo || r.get("tomography.enabled", parse_bool, false);
  t.state = r.get("tomography.state", str, t.state);
  if (t.state != "simulated" && t.state != "ideal" && t.state != "mixed")
    throw entry_error(doc.at("tomography.state"), "state must be simulated, ideal or mixed");
  t.n_ions = n_ions;
  if (const ConfigEntry* e = r.find("tomography.ions")) {
    t.n_ions = positive_int(*e, 2);
    if (t.n_ions > 3) throw entry_error(*e, "tomography supports two or three ions");
    if (t.state == "simulated" && t.n_ions != n_ions) throw entry_error(*e, "ion count differs from the drive");
  }
  if (const ConfigEntry* e = r.find("tomography.shots_reference")) t.shots_reference = positive_int(*e, 10);
  if (const ConfigEntry* e = r.find("tomography.shots_identity")) t.shots_identity = positive_int(*e);
  if (const ConfigEntry* e = r.find("tomography.shots_rotation")) t.shots_rotation = positive_int(*e);
  if (const ConfigEntry* e = r.find("tomography.bins")) t.bins = positive_int(*e, 2);
  if (const ConfigEntry* e = r.find("tomography.resamples")) t.resamples = positive_int(*e, 0);
  if (const ConfigEntry* e = r.find("tomography.sweep_points")) t.sweep_points = positive_int(*e, 0);
  if (t.sweep_points == 1) throw entry_error(doc.at("tomography.sweep_points"), "use 0 (off) or >= 2 points");
  t.detection.bright_mean = r.get("tomography.bright_mean", parse_number, t.detection.bright_mean);
  t.detection.dark_mean = r.get("tomography.dark_mean", parse_number, t.detection.dark_mean);
  t.detection.pump_prob = r.get("tomography.pump_prob", parse_number, t.detection.pump_prob);
  checked(r.find("tomography.bright_mean"), "invalid detection model", [&] {
    t.detection.validate();
    return 0;
  });

  // sweep
  if (c.scenario == ScenarioKind::sweep) {
    for (const std::string suffix : {"", "2"}) {
      const ConfigEntry* ea = r.find("sweep.axis" + suffix);
      if (!ea) {
        if (suffix.empty()) throw ConfigError("missing required key 'sweep.axis'");
        for (const char* k : {"sweep.min2", "sweep.max2", "sweep.points2"})
          if (const ConfigEntry* stray = r.find(k)) throw entry_error(*stray, std::string(k) + " without sweep.axis2");
        continue;
      }
      SweepRange s;
      s.axis = parse_axis(*ea);
      s.min = axis_value(s.axis, doc.at("sweep.min" + suffix));
      s.max = axis_value(s.axis, doc.at("sweep.max" + suffix));
      s.points = positive_int(doc.at("sweep.points" + suffix));
      if (s.max < s.min) throw entry_error(doc.at("sweep.max" + suffix), "max must be >= min");
      if (s.points > 1 && s.max == s.min) throw entry_error(doc.at("sweep.max" + suffix), "empty range");
      if (s.axis == SweepAxis::omega_ratio && !(s.min > 0.0)) throw entry_error(doc.at("sweep.min" + suffix), "ratio must be > 0");
      if (s.axis == SweepAxis::t1) {
        if (c.plan.scheme != Scheme::composite) throw entry_error(*ea, "t1 axis needs drive.scheme = composite");
        if (!(s.min > 0.0 && s.max < 1.0)) throw entry_error(*ea, "t1 is a fraction of t_pi in (0, 1)");
      }
      if (!c.sweep.empty() && c.sweep[0].axis == s.axis) throw entry_error(*ea, "axis repeated");
      c.sweep.push_back(s);
    }
  }
  return c;
}

namespace {

void write_header(std::ostream& os, const ScenarioConfig& c) {
  os << "# scenario = " << to_string(c.scenario) << '\n';
  if (!c.preset.empty()) os << "# preset = " << c.preset << '\n';
  os << "# seed = " << c.seed << '\n';
  os << "# units = rad/s for frequencies, s for times, 1/s for rates\n";
  if (c.scenario == ScenarioKind::dressed_scan) {
    os << "# omega_s = " << fmt(c.scan.omega_s) << "\n# omega_d = " << fmt(c.scan.omega_d)
       << "\n# delta_min = " << fmt(c.scan.delta_min) << "\n# delta_max = " << fmt(c.scan.delta_max)
       << "\n# points = " << c.scan.points << '\n';
    return;
  }
  const ProtocolPlan& p = c.plan;
  os << "# scheme = " << scheme_name(p) << "\n# n_ions = " << p.n_ions << "\n# m = " << p.m
     << "\n# omega_s = " << fmt(p.omega_s) << "\n# omega_d = " << fmt(p.omega_d) << "\n# delta = " << fmt(p.delta)
     << "\n# t_pi = " << fmt(p.t_pi) << "\n# t1 = " << fmt(p.t1) << "\n# t2 = " << fmt(p.t2) << '\n';
  const NoiseModel& n = c.noise;
  os << "# gamma_du = " << fmt(n.gamma_du) << "\n# gamma_ud = " << fmt(n.gamma_ud) << "\n# gamma_ou = "
     << fmt(n.gamma_ou) << "\n# gamma_od = " << fmt(n.gamma_od) << "\n# gamma_heat = " << fmt(n.gamma_heat)
     << "\n# n_bar = " << fmt(n.n_bar) << "\n# stark =";
  if (n.stark_shifts.empty()) os << " none";
  for (double s : n.stark_shifts) os << ' ' << fmt(s);
  os << "\n# n_fock = " << c.sim.n_fock << "\n# samples = " << c.sim.samples << "\n# window = " << fmt(c.window)
     << "\n# lindblad_tol = " << fmt(c.sim.lindblad_tol) << '\n';
  for (const auto& s : c.sweep)
    os << "# sweep_" << axis_name(s.axis) << " = " << fmt(s.min) << " .. " << fmt(s.max) << " (" << s.points
       << " points)\n";
}

std::ofstream open_out(const ScenarioConfig& c, const std::string& name, RunSummary& summary) {
  const std::filesystem::path path = std::filesystem::path(c.out_dir) / name;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  summary.files.push_back(path.string());
  return f;
}

struct TomographyRun {
  TomographyEstimate estimate;
  BinChoice bins;
  SweepResult sweep;
  bool swept = false;
};

TomographyRun run_tomography(const ScenarioConfig& c, int n_ions, const CMatrix& rho) {
  const auto& t = c.tomography;
  const NamedState target = n_ions == 2 ? NamedState::T : NamedState::W;
  TomographyRun out;
  const ReferenceSet refs = reference_protocol(t.detection, t.shots_reference, n_ions, stream_seed(c.seed, 1));
  ReferenceSet held;
  ReferenceSet rest;
  held.phases = rest.phases = refs.phases;
  for (const auto& h : refs.histograms) {
    auto [a, b] = split_held_out(h, 0.1);
    held.histograms.push_back(std::move(a));
    rest.histograms.push_back(std::move(b));
  }
  out.bins = choose_bins(held, n_ions, t.bins > 0 ? t.bins : (n_ions == 2 ? 5 : 7));
  const MeasurementDesign design = analysis_design(n_ions, target);
  FitInputs in;
  in.n_ions = n_ions;
  in.references = rest;
  in.data = simulate_data(design, rho, t.detection, t.shots_identity, t.shots_rotation, stream_seed(c.seed, 2));
  in.design = design;
  in.boundaries = out.bins.boundaries;
  out.estimate = fit_ml(in);
  if (t.sweep_points >= 2) {
    out.sweep = systematic_sweep(in, out.estimate, t.sweep_points);
    out.swept = true;
    out.estimate.epsilon_syst = out.sweep.epsilon_syst;
  }
  out.estimate = bootstrap(in, out.estimate, t.resamples, stream_seed(c.seed, 3), {}, c.threads);
  if (t.resamples == 0 && out.swept) apply_interval(out.estimate);
  return out;
}

void write_tomography(const ScenarioConfig& c, const TomographyRun& t, RunSummary& summary) {
  {
    auto f = open_out(c, "tomography.json", summary);
    f << estimate_json(t.estimate) << '\n';
  }
  auto f = open_out(c, "tomography_report.txt", summary);
  write_header(f, c);
  f << "# tomography_state = " << c.tomography.state << "\n# shots_reference = " << c.tomography.shots_reference
    << "\n# shots_identity = " << c.tomography.shots_identity << "\n# shots_rotation = "
    << c.tomography.shots_rotation << "\n# bright_mean = " << fmt(c.tomography.detection.bright_mean)
    << "\n# dark_mean = " << fmt(c.tomography.detection.dark_mean)
    << "\n# pump_prob = " << fmt(c.tomography.detection.pump_prob) << '\n';
  f << "bin_boundaries";
  for (int b : t.bins.boundaries) f << '\t' << b;
  f << "\ninformation\t" << fmt(t.bins.information) << "\nfull_information\t" << fmt(t.bins.full_information)
    << "\nfidelity\t" << fmt(t.estimate.fidelity) << "\niterations\t" << t.estimate.iterations << "\nconverged\t"
    << (t.estimate.converged ? 1 : 0) << "\nepsilon_0\t" << fmt(t.estimate.epsilon_0) << "\nepsilon_syst\t"
    << fmt(t.estimate.epsilon_syst) << '\n';
  if (t.swept)
    f << "sweep_slope\t" << fmt(t.sweep.slope) << "\nsweep_nonlinear\t" << (t.sweep.nonlinear ? 1 : 0) << '\n';
}

RunSummary run_protocol(const ScenarioConfig& cfg) {
  RunSummary summary;
  ScenarioConfig c = cfg;
  std::optional<FineTuneResult> tuned;
  if (!c.fine_tune.empty()) {
    tuned = fine_tune(c.plan, c.fine_tune, c.sim);
    c.plan = tuned->plan;
  }
  const ProtocolTrace trace = simulate_trace(c.plan, c.noise, c.sim, c.window);
  const ErrorBudget budget = error_budget(c.plan, c.noise, c.sim);

  const double total = c.plan.total_duration();
  double best = -1.0;
  double best_t = 0.0;
  for (std::size_t i = 0; i < trace.record.times.size(); ++i) {
    const double t = trace.record.times[i];
    const double f = trace.record.samples[i].targets[0];
    const bool at_end = std::abs(t - total) <= 1e-9 * total;
    if (c.sim.peak ? f > best : at_end) {
      best = f;
      best_t = t;
    }
  }
  summary.fidelity = best;

  {
    auto f = open_out(c, "trace.tsv", summary);
    write_header(f, c);
    f << "t";
    for (int k = 0; k <= c.plan.n_ions; ++k) f << "\tP" << k;
    f << "\tF_" << trace.record.target_names[0];
    for (std::size_t k = 1; k < trace.record.target_names.size(); ++k) f << "\tP_" << trace.record.target_names[k];
    f << "\tleakage\n";
    for (std::size_t i = 0; i < trace.record.times.size(); ++i) {
      const auto& s = trace.record.samples[i];
      f << fmt(trace.record.times[i]);
      for (double p : s.p_up) f << '\t' << fmt(p);
      for (double p : s.targets) f << '\t' << fmt(p);
      f << '\t' << fmt(s.leakage) << '\n';
    }
  }
  {
    auto f = open_out(c, "budget.txt", summary);
    write_header(f, c);
    f << "leakage\t" << fmt(budget.leakage) << "\nspontaneous\t" << fmt(budget.spontaneous) << "\nthermal\t"
      << fmt(budget.thermal) << "\nheating\t" << fmt(budget.heating) << "\nstark\t" << fmt(budget.stark)
      << "\ntotal_predicted\t" << fmt(budget.total_predicted) << '\n';
    f << (c.sim.peak ? "peak_fidelity\t" : "end_fidelity\t") << fmt(best) << "\nat_time\t" << fmt(best_t) << '\n';
    if (tuned) {
      f << "fine_tune_start_fidelity\t" << fmt(tuned->start_fidelity) << "\nfine_tune_fidelity\t"
        << fmt(tuned->fidelity) << "\nfine_tune_evaluations\t" << tuned->evaluations << '\n';
      for (TuneParam p : c.fine_tune) {
        const double v = p == TuneParam::omega_d ? c.plan.omega_d
                         : p == TuneParam::t1    ? c.plan.t1
                         : p == TuneParam::t2    ? c.plan.t2
                                                 : c.plan.delta;
        f << "tuned_" << param_name(p) << '\t' << fmt(v) << '\n';
      }
    }
  }
  if (c.tomography.enabled) write_tomography(c, run_tomography(c, c.plan.n_ions, trace.qubit_state), summary);
  return summary;
}

RunSummary run_dressed(const ScenarioConfig& c) {
  RunSummary summary;
  const auto& s = c.scan;
  const DetuningScan scan = scan_detuning(s.omega_s, s.delta_min, s.delta_max, s.points);
  {
    auto f = open_out(c, "spectrum.tsv", summary);
    write_header(f, c);
    f << "# symmetric_points =";
    for (double d : scan.symmetric_points) f << ' ' << fmt(d);
    f << "\n# dark_points =";
    for (double d : scan.dark_points) f << ' ' << fmt(d);
    f << "\ndelta\tbranch_1\tbranch_2\tbranch_3\n";
    for (std::size_t i = 0; i < scan.deltas.size(); ++i)
      f << fmt(scan.deltas[i]) << '\t' << fmt(scan.branches[i][0]) << '\t' << fmt(scan.branches[i][1]) << '\t'
        << fmt(scan.branches[i][2]) << '\n';
  }
  auto f = open_out(c, "spectrum_points.tsv", summary);
  write_header(f, c);
  f << "delta\tDelta_1\tDelta_2\tDelta_3\tOmega_0\tOmega_1\tOmega_2\tOmega_3\tdark_index\n";
  const double d_opt = optimal_detuning(s.omega_s);
  for (double d : {-d_opt, 0.0, d_opt}) {
    const DressedSpectrum sp = dressed_spectrum(s.omega_s, d, s.omega_d);
    f << fmt(d);
    for (double x : sp.eigenfrequencies) f << '\t' << fmt(x);
    for (double x : sp.couplings) f << '\t' << fmt(x);
    f << '\t' << (sp.dark_index >= 0 ? std::to_string(sp.dark_index + 1) : "none") << '\n';
  }
  return summary;
}

RunSummary run_tomography_demo(const ScenarioConfig& c) {
  RunSummary summary;
  const int n = c.tomography.n_ions;
  CMatrix rho;
  if (c.tomography.state == "simulated") {
    rho = simulate_trace(c.plan, c.noise, c.sim, 1.0).qubit_state;
  } else if (c.tomography.state == "ideal") {
    const CVector t = spin_state(n, false, n == 2 ? NamedState::T : NamedState::W);
    rho = t * t.adjoint();
  } else {
    rho = CMatrix::Identity(1 << n, 1 << n) / static_cast<double>(1 << n);
  }
  const TomographyRun t = run_tomography(c, n, rho);
  write_tomography(c, t, summary);
  summary.fidelity = t.estimate.fidelity;
  return summary;
}

RunSummary run_sweep_table(const ScenarioConfig& c) {
  RunSummary summary;
  const auto points = run_sweep(c);
  auto f = open_out(c, "sweep.tsv", summary);
  write_header(f, c);
  for (const auto& s : c.sweep) f << axis_name(s.axis) << '\t';
  f << "fidelity\tinfidelity\n";
  for (const auto& p : points) {
    for (double x : p.coords) f << fmt(x) << '\t';
    f << fmt(p.fidelity) << '\t' << fmt(1.0 - p.fidelity) << '\n';
  }
  return summary;
}

double grid_value(const SweepRange& s, int i) {
  return s.points == 1 ? s.min : s.min + (s.max - s.min) * i / (s.points - 1);
}

}  // namespace

std::vector<SweepPoint> run_sweep(const ScenarioConfig& c) {
  if (c.sweep.empty() || c.sweep.size() > 2) throw std::invalid_argument("sweep needs one or two axes");
  const int n0 = c.sweep[0].points;
  const int n1 = c.sweep.size() > 1 ? c.sweep[1].points : 1;
  std::vector<SweepPoint> out(static_cast<std::size_t>(n0) * n1);
  std::vector<std::string> errors(out.size());

  auto eval = [&](std::size_t idx) {
    SweepPoint& pt = out[idx];
    const int i = static_cast<int>(idx) / n1;
    const int j = static_cast<int>(idx) % n1;
    ProtocolPlan plan = c.plan;
    NoiseModel noise = c.noise;
    std::optional<double> t1_frac;
    std::optional<double> gamma;
    for (std::size_t a = 0; a < c.sweep.size(); ++a) {
      const double v = grid_value(c.sweep[a], a == 0 ? i : j);
      pt.coords.push_back(v);
      switch (c.sweep[a].axis) {
        case SweepAxis::omega_ratio: plan = with_omega_d(plan, plan.omega_s / v); break;
        case SweepAxis::t1: t1_frac = v; break;
        case SweepAxis::n_bar: noise.n_bar = v; break;
        case SweepAxis::gamma: gamma = v; break;
      }
    }
    if (t1_frac) {
      plan.t1 = *t1_frac * plan.t_pi;
      plan.t2 = plan.t_pi - plan.t1;
    }
    if (gamma) {
      const NoiseModel s = spontaneous_preset(plan.n_ions, 1.0 - std::exp(-*gamma * plan.total_duration()),
                                              plan.total_duration());
      noise.gamma_du = s.gamma_du;
      noise.gamma_ud = s.gamma_ud;
      noise.gamma_ou = s.gamma_ou;
      noise.gamma_od = s.gamma_od;
    }
    SimOptions so = c.sim;
    so.peak = false;
    try {
      pt.fidelity = simulate_fidelity(plan, noise, so).fidelity;
    } catch (const std::exception& ex) {
      errors[idx] = ex.what();
    }
  };

  int threads = c.threads > 0 ? c.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min<int>(threads, static_cast<int>(out.size()));
  if (threads <= 1) {
    for (std::size_t k = 0; k < out.size(); ++k) eval(k);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t k = t; k < out.size(); k += threads) eval(k);
      });
    for (auto& th : pool) th.join();
  }
  for (std::size_t k = 0; k < out.size(); ++k)
    if (!errors[k].empty()) throw NumericalError("sweep point " + std::to_string(k) + ": " + errors[k]);
  return out;
}

RunSummary run_scenario(const ScenarioConfig& c) {
  std::filesystem::create_directories(c.out_dir);
  switch (c.scenario) {
    case ScenarioKind::two_ion_single:
    case ScenarioKind::two_ion_composite:
    case ScenarioKind::three_ion_w: return run_protocol(c);
    case ScenarioKind::dressed_scan: return run_dressed(c);
    case ScenarioKind::tomography_demo: return run_tomography_demo(c);
    case ScenarioKind::sweep: return run_sweep_table(c);
  }
  throw std::invalid_argument("unknown scenario");
}

}  // namespace zeno
