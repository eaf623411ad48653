/*
 * Copyright 2026 The hkgeneo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of the hkgeneo solver library.
 *
 * Two-level additive Schwarz preconditioning with a spectral coarse space
 * for P1 Helmholtz problems on the unit square, plus the experiment driver.
 *
 * All functions return HK_OK on success or a positive error code; the
 * message of the last failure on the calling thread is available through
 * hk_last_error(). Handles are opaque and must be released with the
 * matching destroy function. Handles are not thread-safe; distinct handles
 * may be used from distinct threads.
 */

#ifndef HKGENEO_H
#define HKGENEO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32) && defined(HKGENEO_BUILDING_LIBRARY)
#define HK_API __declspec(dllexport)
#elif defined(_WIN32)
#define HK_API __declspec(dllimport)
#elif defined(HKGENEO_BUILDING_LIBRARY)
#define HK_API __attribute__((visibility("default")))
#else
#define HK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hk_status {
  HK_OK = 0,
  HK_ERR_INTERNAL = 1,
  HK_ERR_CONFIG = 2,
  HK_ERR_SINGULAR = 3,
  HK_ERR_EIGENSOLVE = 4,
  HK_ERR_NO_CONVERGENCE = 5,
  HK_ERR_ARGUMENT = 6
} hk_status;

typedef struct hk_config hk_config;
typedef struct hk_session hk_session;

/* Summary of one solve. */
typedef struct hk_run_summary {
  double k;
  int n_per_side;
  int n_dofs;
  int levels;
  int coarse_m;
  int num_coarse;
  int num_fine;
  int lambda_overlap;
  double hf;
  double tau;
  double theta;
  int coarse_dim;
  double cstab;
  double s;
  double gamma;
  int iterations;
  int converged;
  double final_resid;
} hk_run_summary;

HK_API const char* hk_version(void);
/* Message of the last failure on this thread ("" if none). */
HK_API const char* hk_last_error(void);

/* ---- configuration ---------------------------------------------------- */

HK_API hk_status hk_config_create(hk_config** out);
HK_API void hk_config_destroy(hk_config* cfg);
/* Appends the key=value lines of a file. */
HK_API hk_status hk_config_load_file(hk_config* cfg, const char* path);
/* Sets one key (validated immediately). */
HK_API hk_status hk_config_set(hk_config* cfg, const char* key, const char* value);
/* Copies the current value of `key` (as last set; "" if unset) into buf.
 * Returns HK_ERR_ARGUMENT when the buffer is too small. */
HK_API hk_status hk_config_get(const hk_config* cfg, const char* key, char* buf, size_t len);

/* ---- drivers ---------------------------------------------------------- */

/* Full pipeline; writes run artifacts to out_dir when it is non-NULL.
 * `summary` may be NULL. A run that does not converge returns
 * HK_ERR_NO_CONVERGENCE with the summary filled in. */
HK_API hk_status hk_run_single(const hk_config* cfg, const char* out_dir,
                               hk_run_summary* summary);
/* Runs the study named by the "study" key into out_dir. */
HK_API hk_status hk_run_study(const hk_config* cfg, const char* out_dir);

/* ---- sessions: assembled problem with factorized preconditioner ------- */

HK_API hk_status hk_session_create(const hk_config* cfg, hk_session** out);
HK_API void hk_session_destroy(hk_session* s);
HK_API int hk_session_n_dofs(const hk_session* s);
/* y = M^{-1} x */
HK_API hk_status hk_session_apply_preconditioner(const hk_session* s, const double* x,
                                                 double* y);
/* y = B x */
HK_API hk_status hk_session_apply_operator(const hk_session* s, const double* x, double* y);
/* Solves B x = rhs with preconditioned GMRES; rhs NULL uses the configured
 * load vector. iterations may be NULL. */
HK_API hk_status hk_session_solve(const hk_session* s, const double* rhs, double* x,
                                  int* iterations);
/* which: "stiffness", "mass", "helmholtz" or "dk". */
HK_API hk_status hk_session_write_matrix_market(const hk_session* s, const char* which,
                                                const char* path);
HK_API hk_status hk_session_dump_subdomains(const hk_session* s, const char* path);
HK_API hk_status hk_session_write_spectrum(const hk_session* s, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* HKGENEO_H */
