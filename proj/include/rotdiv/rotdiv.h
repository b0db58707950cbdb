#ifndef ROTDIV_ROTDIV_H
#define ROTDIV_ROTDIV_H

/* C interface to the rotdiv library. Handles are opaque; every fallible
 * call returns a rotdiv_status and leaves a message for
 * rotdiv_last_error() (thread-local, valid until the next call on the same
 * thread). Strings returned through char** are owned by the caller and must
 * be released with rotdiv_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(ROTDIV_BUILDING_LIBRARY)
#define ROTDIV_API __attribute__((visibility("default")))
#else
#define ROTDIV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rotdiv_status {
  ROTDIV_OK = 0,
  ROTDIV_E_INPUT = 1,
  ROTDIV_E_CAP_EXCEEDED = 2,
  ROTDIV_E_HYPOTHESIS = 3,
  ROTDIV_E_RETRIES_EXHAUSTED = 4,
  ROTDIV_E_ESTIMATION = 5,
  ROTDIV_E_IO = 6,
  ROTDIV_E_INTERNAL = 99
} rotdiv_status;

typedef struct rotdiv_scheme rotdiv_scheme;
typedef struct rotdiv_rotation rotdiv_rotation;

typedef struct rotdiv_run_options {
  int has_seed;
  uint64_t seed;
  int has_workers;
  unsigned workers; /* 0 = all cores */
  int has_tolerance;
  double tolerance; /* relative rank scale */
} rotdiv_run_options;

ROTDIV_API const char* rotdiv_version(void);
ROTDIV_API const char* rotdiv_last_error(void);
/* {"error": {...}} for the last failure on this thread, "" after success. */
ROTDIV_API const char* rotdiv_last_error_json(void);
ROTDIV_API void rotdiv_string_free(char* s);

/* kind: plain_ofdm, precoded_cp_ofdm, dft_s_ofdm, dd_grid or custom.
 * params_json may be NULL; it accepts the same keys as a spec "scheme"
 * object (precoder, n_doppler, m_delay, psi, g, adjust_prefix). */
ROTDIV_API rotdiv_status rotdiv_scheme_create(const char* kind, size_t m, size_t mp,
                                              const char* params_json, rotdiv_scheme** out);
ROTDIV_API void rotdiv_scheme_free(rotdiv_scheme* scheme);
ROTDIV_API size_t rotdiv_scheme_m(const rotdiv_scheme* scheme);
ROTDIV_API size_t rotdiv_scheme_mp(const rotdiv_scheme* scheme);

ROTDIV_API rotdiv_status rotdiv_rotation_identity(size_t m, rotdiv_rotation** out);
ROTDIV_API rotdiv_status rotdiv_rotation_random(size_t m, uint64_t seed, rotdiv_rotation** out);
ROTDIV_API rotdiv_status rotdiv_rotation_from_angles(const double* angles, size_t m,
                                                     rotdiv_rotation** out);
/* Copies min(m, capacity) angles into `angles`; returns the full length via *m. */
ROTDIV_API rotdiv_status rotdiv_rotation_angles(const rotdiv_rotation* phi, double* angles,
                                                size_t capacity, size_t* m);
ROTDIV_API void rotdiv_rotation_free(rotdiv_rotation* phi);

/* per_q_ranks may be NULL, otherwise it must hold M entries. */
ROTDIV_API rotdiv_status rotdiv_check_full_diversity(const rotdiv_scheme* scheme, size_t l_max,
                                                     size_t k_max, int* pass,
                                                     size_t* per_q_ranks);

/* alphabet: "bpsk", "qpsk" or "qam16". */
ROTDIV_API rotdiv_status rotdiv_exhaustive_diversity(const rotdiv_scheme* scheme,
                                                     const rotdiv_rotation* phi,
                                                     const char* alphabet, size_t l_max,
                                                     size_t k_max, unsigned workers,
                                                     size_t* order);

/* Sequential construction for precoded schemes on time-dispersive channels,
 * verified random draws otherwise. */
ROTDIV_API rotdiv_status rotdiv_construct_rotation(const rotdiv_scheme* scheme,
                                                   const char* alphabet, size_t l_max,
                                                   size_t k_max, uint64_t seed,
                                                   rotdiv_rotation** out);

/* Runs a JSON experiment spec, writing artifacts under out_dir. On success
 * *report_json (if non-NULL) receives the report. */
ROTDIV_API rotdiv_status rotdiv_run_experiment(const char* spec_json, const char* out_dir,
                                               const rotdiv_run_options* options,
                                               char** report_json);

/* JSON array of preset names. */
ROTDIV_API rotdiv_status rotdiv_list_presets(char** names_json);
ROTDIV_API rotdiv_status rotdiv_preset_spec(const char* name, char** spec_json);

#ifdef __cplusplus
}
#endif

#endif
