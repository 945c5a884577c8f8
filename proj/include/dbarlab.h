/* dbarlab: fixed-positive-energy inverse scattering toolkit.
 *
 * C API over the reconstruction pipeline: Dirichlet-to-Neumann synthesis,
 * scattering data (r, rho), the non-local Riemann-Hilbert solve, and the
 * stability sweep harness. Handles are opaque; all functions return a
 * dbar status code and leave a message for dbar_last_error() on failure.
 */
#ifndef DBARLAB_H
#define DBARLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  DBAR_OK = 0,
  DBAR_E_INVALID = 1,
  DBAR_E_CONFIG = 2,
  DBAR_E_SOLVER = 3,
  DBAR_E_IO = 4
};

const char* dbar_version(void);

/* thread-local message describing the most recent failure */
const char* dbar_last_error(void);

/* ------------------------------------------------------------------ */
/* configuration                                                       */
/* ------------------------------------------------------------------ */
typedef struct dbar_config dbar_config;

int dbar_config_create(dbar_config** out);
int dbar_config_load(const char* path, dbar_config** out);
int dbar_config_set(dbar_config* cfg, const char* key, const char* value);
/* copies the value into buf (NUL-terminated); missing key -> DBAR_E_CONFIG */
int dbar_config_get(const dbar_config* cfg, const char* key, char* buf, size_t bufsize);
void dbar_config_free(dbar_config* cfg);

/* ------------------------------------------------------------------ */
/* pipeline runs (CLI subcommand semantics; artifacts under out_prefix) */
/* ------------------------------------------------------------------ */
int dbar_run_forward(const dbar_config* cfg, const char* out_prefix);
int dbar_run_dtn(const dbar_config* cfg, const char* out_prefix);
int dbar_run_scatter(const dbar_config* cfg, const char* out_prefix);
int dbar_run_reconstruct(const dbar_config* cfg, const char* scat_path, int grid_n,
                         const char* route, const char* out_prefix);
int dbar_run_sweep_delta(const dbar_config* cfg, const char* out_prefix);
int dbar_run_sweep_energy(const dbar_config* cfg, const char* out_prefix);
/* runs the quick zero-case/identity suite; DBAR_OK when everything passes */
int dbar_run_selftest(int verbose);

/* ------------------------------------------------------------------ */
/* field files                                                          */
/* ------------------------------------------------------------------ */
typedef struct dbar_field dbar_field;

int dbar_field_read(const char* path, dbar_field** out);
int dbar_field_size(const dbar_field* f, int* n_out);
int dbar_field_get(const dbar_field* f, size_t index, double* re_out, double* im_out);
void dbar_field_free(dbar_field* f);

#ifdef __cplusplus
}
#endif

#endif /* DBARLAB_H */
