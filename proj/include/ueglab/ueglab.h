#ifndef UEGLAB_H
#define UEGLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(UEGLAB_BUILDING_LIBRARY)
#define UEG_API __attribute__((visibility("default")))
#else
#define UEG_API
#endif

/* Status codes. Every fallible call returns one; on failure
 * ueg_last_error() holds a message for the calling thread. */
typedef enum ueg_status {
  UEG_OK = 0,
  UEG_INVALID_ARGUMENT = 1,
  UEG_DEGENERATE_CONFIGURATION = 2,
  UEG_PARSE_ERROR = 3,
  UEG_INSUFFICIENT_DATA = 4,
  UEG_IO_ERROR = 5,
  UEG_INTERNAL_ERROR = 99
} ueg_status;

UEG_API const char* ueg_version(void);
/* Message of the last failed call on this thread, "" if none. */
UEG_API const char* ueg_last_error(void);
UEG_API const char* ueg_status_name(ueg_status status);

/* ---- commands and their configuration keys ---- */

UEG_API size_t ueg_command_count(void);
UEG_API const char* ueg_command_name(size_t index);
UEG_API ueg_status ueg_command_key_count(const char* command, size_t* count);
/* Any of key, default_value, help may be NULL. */
UEG_API ueg_status ueg_command_key(const char* command, size_t index, const char** key,
                                   const char** default_value, const char** help);

/* ---- runs ---- */

typedef struct ueg_run ueg_run;
typedef void (*ueg_progress_fn)(const char* message, void* user_data);

UEG_API ueg_status ueg_run_create(const char* command, ueg_run** run);
/* Recreates the configuration recorded in a manifest.json. */
UEG_API ueg_status ueg_run_from_manifest(const char* manifest_path, ueg_run** run);
UEG_API void ueg_run_destroy(ueg_run* run);

UEG_API const char* ueg_run_command(const ueg_run* run);
UEG_API ueg_status ueg_run_load_config(ueg_run* run, const char* path);
/* origin labels the value in error messages; NULL means "command line". */
UEG_API ueg_status ueg_run_set(ueg_run* run, const char* key, const char* value, const char* origin);
/* Effective value of a key (default if unset). Valid until the next call on run. */
UEG_API ueg_status ueg_run_get(ueg_run* run, const char* key, const char** value);

/* Computes and writes the outputs into out_dir. progress may be NULL. */
UEG_API ueg_status ueg_run_execute(ueg_run* run, const char* out_dir, ueg_progress_fn progress, void* user_data);

/* Results of the last successful execute. */
UEG_API size_t ueg_run_output_count(const ueg_run* run);
UEG_API const char* ueg_run_output(const ueg_run* run, size_t index);
UEG_API size_t ueg_run_warning_count(const ueg_run* run);
UEG_API const char* ueg_run_warning(const ueg_run* run, size_t index);
/* Flags mark results that completed but need attention. */
UEG_API size_t ueg_run_flag_count(const ueg_run* run);
UEG_API const char* ueg_run_flag(const ueg_run* run, size_t index);

/* ---- numerics ---- */

UEG_API ueg_status ueg_density_to_rs(double density, double* rs);
UEG_API ueg_status ueg_rs_to_density(double rs, double* density);
/* Per-electron energies of the uniform gas, hartree. */
UEG_API ueg_status ueg_thomas_fermi(double density, double* energy);
UEG_API ueg_status ueg_dirac_exchange(double density, double* energy);

/* Periodic Coulomb interaction in a cubic cell with neutralizing background. */
typedef struct ueg_ewald ueg_ewald;
/* alpha_edge <= 0 or tolerance <= 0 select the defaults (6 and 1e-12). */
UEG_API ueg_status ueg_ewald_create(int electrons, double edge, double alpha_edge, double tolerance,
                                    ueg_ewald** ewald);
UEG_API void ueg_ewald_destroy(ueg_ewald* ewald);
/* Total energy of `electrons` positions, xyz interleaved. */
UEG_API ueg_status ueg_ewald_energy(const ueg_ewald* ewald, const double* xyz, double* energy);
UEG_API ueg_status ueg_ewald_pair_potential(const ueg_ewald* ewald, const double displacement[3], double* value);
UEG_API ueg_status ueg_ewald_image_constant(const ueg_ewald* ewald, double* value);

/* base_two != 0 reports bits. */
UEG_API ueg_status ueg_shannon_discrete(const double* p, size_t n, int base_two, double* entropy);
UEG_API ueg_status ueg_collins_sum(const double* occupations, size_t n, double scale, double* value);
/* k in units of k_F, non-decreasing from 0 to at least 2. */
UEG_API ueg_status ueg_ziesche_entropy(const double* k, const double* values, size_t n, double* entropy);

typedef struct ueg_log_fit {
  double a, b, a_error, b_error, cov_ab, r2, window_lo, window_hi;
  size_t points;
} ueg_log_fit;
/* Weighted fit y = A + B ln(rho) over window_lo <= rho <= window_hi. */
UEG_API ueg_status ueg_fit_log(const double* density, const double* value, const double* error, size_t n,
                               double window_lo, double window_hi, ueg_log_fit* fit);

#ifdef __cplusplus
}
#endif

#endif
