#ifndef ZENO_ZENO_H
#define ZENO_ZENO_H

/* C interface to the zeno simulator. Every call returns a zeno_status; on failure the
 * message is available from zeno_last_error() on the same thread until the next call. */

#include <stddef.h>
#include <stdint.h>

#if defined(ZENO_BUILDING_LIBRARY)
#define ZENO_API __attribute__((visibility("default")))
#else
#define ZENO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum zeno_status {
  ZENO_OK = 0,
  ZENO_ERR_ARGUMENT = 1,
  ZENO_ERR_CONFIG = 2,
  ZENO_ERR_NUMERICAL = 3,
  ZENO_ERR_FIT = 4,
  ZENO_ERR_INTERNAL = 5
} zeno_status;

typedef struct zeno_config zeno_config;
typedef struct zeno_result zeno_result;

ZENO_API const char* zeno_version(void);
ZENO_API const char* zeno_last_error(void);

/* Configuration documents. */
ZENO_API zeno_status zeno_config_load(const char* path, zeno_config** out);
ZENO_API zeno_status zeno_config_parse(const char* text, zeno_config** out);
/* A configuration made only of a built-in preset (fig2, fig3, fig_s4, fig_s6a, three_ion). */
ZENO_API zeno_status zeno_config_from_preset(const char* name, zeno_config** out);
ZENO_API void zeno_config_free(zeno_config* cfg);
ZENO_API zeno_status zeno_config_set_preset(zeno_config* cfg, const char* name);
/* "section.key=value"; applied in call order after the document. */
ZENO_API zeno_status zeno_config_override(zeno_config* cfg, const char* assignment);
/* Resolves the document without running it. */
ZENO_API zeno_status zeno_config_validate(const zeno_config* cfg);

ZENO_API size_t zeno_preset_count(void);
ZENO_API const char* zeno_preset_name(size_t index);

/* Runs the configured scenario; out_dir and seed replace run.out and run.seed when
 * non-NULL. */
ZENO_API zeno_status zeno_run(const zeno_config* cfg, const char* out_dir, const uint64_t* seed,
                              zeno_result** out);
ZENO_API void zeno_result_free(zeno_result* result);
ZENO_API size_t zeno_result_file_count(const zeno_result* result);
ZENO_API const char* zeno_result_file(const zeno_result* result, size_t index);
/* ZENO_ERR_ARGUMENT when the scenario reports no fidelity. */
ZENO_API zeno_status zeno_result_fidelity(const zeno_result* result, double* fidelity);

/* Dressed states of the undesired two-ion subspace, rad/s in and out.
 * eigenfrequencies[3] = Delta_1..3, couplings[4] = Omega_0..3. */
ZENO_API zeno_status zeno_dressed_spectrum(double omega_s, double delta, double omega_d, double* eigenfrequencies,
                                           double* couplings);

/* Two-ion plan: scheme 0 single pulse, 1 composite. Outputs may be NULL. */
ZENO_API zeno_status zeno_plan(int scheme, double omega_s, int m, double* omega_d, double* delta, double* t_pi);

/* Noiseless end fidelity of a two-ion plan with an explicit drive. */
ZENO_API zeno_status zeno_two_ion_fidelity(int scheme, double omega_s, double omega_d, double delta, double t1,
                                           double t2, double* fidelity);

/* Histogram file (`<count> <occurrences>` lines): total shots and the mean count. */
ZENO_API zeno_status zeno_histogram_summary(const char* path, long* shots, double* mean_count);

#ifdef __cplusplus
}
#endif

#endif
