// Exercises the shared library through zeno.h only.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "zeno/zeno.h"

namespace {
constexpr double kTwoPi = 6.283185307179586;
double khz(double v) { return kTwoPi * 1e3 * v; }
}  // namespace

TEST_SUITE("capi") {

TEST_CASE("version and presets") {
  CHECK(std::string(zeno_version()) == "0.1.0");
  REQUIRE(zeno_preset_count() == 5);
  CHECK(std::string(zeno_preset_name(0)) == "fig2");
  CHECK(zeno_preset_name(99) == nullptr);
}

TEST_CASE("config errors carry a message") {
  zeno_config* cfg = nullptr;
  CHECK(zeno_config_parse("[run]\nscenario = two_ion_single\n[drive]\nwarp = 9\n", &cfg) == ZENO_OK);
  CHECK(zeno_config_validate(cfg) == ZENO_ERR_CONFIG);
  CHECK(std::string(zeno_last_error()).find("warp") != std::string::npos);
  zeno_config_free(cfg);
  CHECK(zeno_config_parse("[run\n", &cfg) == ZENO_ERR_CONFIG);
  CHECK(zeno_config_from_preset("nope", &cfg) == ZENO_ERR_CONFIG);
  CHECK(zeno_config_parse(nullptr, &cfg) == ZENO_ERR_ARGUMENT);
  CHECK(zeno_config_load("/nonexistent/zeno.cfg", &cfg) == ZENO_ERR_CONFIG);
  zeno_config_free(nullptr);
}

TEST_CASE("dressed spectrum and plans") {
  const double ws = khz(17.6);
  const double delta = std::sqrt(7.0 / 3.0) * ws;
  double eig[3], cpl[4];
  REQUIRE(zeno_dressed_spectrum(ws, delta, khz(1.52), eig, cpl) == ZENO_OK);
  CHECK(eig[0] == doctest::Approx(2.0 / std::sqrt(3.0) * ws));
  CHECK(eig[1] == doctest::Approx(-2.0 / std::sqrt(3.0) * ws));
  CHECK(eig[2] == doctest::Approx(std::sqrt(21.0) * ws));
  CHECK(zeno_dressed_spectrum(0.0, delta, khz(1.52), eig, cpl) != ZENO_OK);

  double wd = 0, d = 0, tpi = 0;
  REQUIRE(zeno_plan(0, ws, 2, &wd, &d, &tpi) == ZENO_OK);
  CHECK(d == doctest::Approx(delta));
  // blocked |dd>: |uu> <-> |T> is a two-level transfer with coupling sqrt(2) Omega_d
  CHECK(tpi == doctest::Approx(kTwoPi / 4 / (std::sqrt(2.0) * wd)).epsilon(1e-9));
  CHECK(zeno_plan(0, ws, 2, nullptr, nullptr, nullptr) == ZENO_OK);
  CHECK(zeno_plan(7, ws, 2, &wd, &d, &tpi) == ZENO_ERR_ARGUMENT);
  CHECK(zeno_plan(0, 0.0, 2, &wd, &d, &tpi) == ZENO_ERR_ARGUMENT);

  double f = 0;
  REQUIRE(zeno_plan(0, ws, 2, &wd, &d, &tpi) == ZENO_OK);
  REQUIRE(zeno_two_ion_fidelity(0, ws, wd, d, tpi, 0, &f) == ZENO_OK);
  CHECK(f > 0.98);
  CHECK(f <= 1.0);
}

TEST_CASE("run writes files and reports the fidelity") {
  zeno_config* cfg = nullptr;
  REQUIRE(zeno_config_from_preset("fig2", &cfg) == ZENO_OK);
  REQUIRE(zeno_config_override(cfg, "run.samples=40") == ZENO_OK);
  CHECK(zeno_config_override(cfg, "nonsense") == ZENO_ERR_CONFIG);
  const auto dir = std::filesystem::temp_directory_path() / "zeno_capi_run";
  std::filesystem::remove_all(dir);
  const uint64_t seed = 3;
  zeno_result* res = nullptr;
  REQUIRE(zeno_run(cfg, dir.string().c_str(), &seed, &res) == ZENO_OK);
  CHECK(zeno_result_file_count(res) >= 2);
  CHECK(zeno_result_file(res, 999) == nullptr);
  double f = 0;
  REQUIRE(zeno_result_fidelity(res, &f) == ZENO_OK);
  CHECK(f > 0.9);
  CHECK(std::filesystem::exists(dir / "trace.tsv"));
  zeno_result_free(res);
  zeno_config_free(cfg);
}

TEST_CASE("histogram summary") {
  const auto path = std::filesystem::temp_directory_path() / "zeno_capi_hist.txt";
  {
    FILE* f = std::fopen(path.string().c_str(), "w");
    REQUIRE(f != nullptr);
    std::fputs("# shots=10\n2 4\n10 6\n", f);
    std::fclose(f);
  }
  long shots = 0;
  double mean = 0;
  REQUIRE(zeno_histogram_summary(path.string().c_str(), &shots, &mean) == ZENO_OK);
  CHECK(shots == 10);
  CHECK(mean == doctest::Approx(6.8));
  CHECK(zeno_histogram_summary("/nonexistent", &shots, &mean) == ZENO_ERR_CONFIG);
}

}
