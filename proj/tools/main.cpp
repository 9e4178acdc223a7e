// zeno run <config-file> [--out DIR] [--seed N] [--preset NAME] [--override key=value]...

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zeno/zeno.h"

namespace {

int exit_code(zeno_status s) {
  switch (s) {
    case ZENO_OK: return 0;
    case ZENO_ERR_CONFIG:
    case ZENO_ERR_ARGUMENT: return 2;
    case ZENO_ERR_NUMERICAL: return 3;
    case ZENO_ERR_FIT: return 4;
    default: return 1;
  }
}

int fail(zeno_status s) {
  std::fprintf(stderr, "zeno: %s\n", zeno_last_error());
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Zeno entanglement simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", zeno_version());

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string preset;
  std::vector<std::string> overrides;

  CLI::App* run = app.add_subcommand("run", "Run the scenario described by a configuration file");
  run->add_option("config", config_path, "Configuration file (optional with --preset)");
  run->add_option("--out", out_dir, "Output directory (replaces run.out)");
  run->add_option("--seed", seed, "Random seed (replaces run.seed)");
  run->add_option("--preset", preset, "Built-in preset: fig2, fig3, fig_s4, fig_s6a, three_ion");
  run->add_option("--override", overrides, "section.key=value, applied after the file")->allow_extra_args(false);

  CLI::App* list = app.add_subcommand("presets", "List the built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (list->parsed()) {
    for (std::size_t i = 0; i < zeno_preset_count(); ++i) std::printf("%s\n", zeno_preset_name(i));
    return 0;
  }

  if (config_path.empty() && preset.empty()) {
    std::fprintf(stderr, "zeno: run needs a configuration file or --preset\n");
    return 2;
  }

  zeno_config* cfg = nullptr;
  zeno_status s = config_path.empty() ? zeno_config_from_preset(preset.c_str(), &cfg)
                                      : zeno_config_load(config_path.c_str(), &cfg);
  if (s != ZENO_OK) return fail(s);
  if (!config_path.empty() && !preset.empty()) s = zeno_config_set_preset(cfg, preset.c_str());
  for (std::size_t i = 0; s == ZENO_OK && i < overrides.size(); ++i) s = zeno_config_override(cfg, overrides[i].c_str());
  if (s != ZENO_OK) {
    zeno_config_free(cfg);
    return fail(s);
  }

  zeno_result* result = nullptr;
  const std::uint64_t seed_value = seed.value_or(0);
  s = zeno_run(cfg, out_dir.empty() ? nullptr : out_dir.c_str(), seed ? &seed_value : nullptr, &result);
  zeno_config_free(cfg);
  if (s != ZENO_OK) return fail(s);

  for (std::size_t i = 0; i < zeno_result_file_count(result); ++i) std::printf("wrote %s\n", zeno_result_file(result, i));
  double f = 0.0;
  if (zeno_result_fidelity(result, &f) == ZENO_OK) std::printf("fidelity %.6f\n", f);
  zeno_result_free(result);
  return 0;
}
