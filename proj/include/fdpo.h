/*------------------------------------------------------------------------------
//
//   Copyright 2026 the fdpo authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//----------------------------------------------------------------------------*/

/* fdpo — f-divergence preference-optimization toolkit, C API.
 *
 * All entry points return fdpo_status; FDPO_OK is 0. On failure the
 * thread-local message from fdpo_last_error() describes the problem and
 * output parameters are left untouched. Handles are opaque and must be
 * released with their destroy function. Unless stated otherwise the
 * functions are pure and safe to call from any number of threads.
 */

#ifndef FDPO_H
#define FDPO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define FDPO_API __declspec(dllexport)
#else
#  define FDPO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fdpo_status {
  FDPO_OK = 0,
  FDPO_ERR_INVALID_ARGUMENT = 1,
  FDPO_ERR_DOMAIN = 2,         /* argument outside the math domain (x <= 0, ...) */
  FDPO_ERR_RANGE = 3,          /* outside the range of f' / index out of range */
  FDPO_ERR_SHAPE = 4,          /* mismatched vector or image dimensions */
  FDPO_ERR_SUPPORT = 5,        /* support domination violated */
  FDPO_ERR_OVERFLOW = 6,       /* value not representable in double precision */
  FDPO_ERR_INFEASIBLE = 7,     /* solver bracket cannot be established */
  FDPO_ERR_NO_CONVERGENCE = 8, /* iteration budget exhausted */
  FDPO_ERR_DIVERGENT = 9,      /* training produced a non-finite loss */
  FDPO_ERR_CONFIG = 10,        /* malformed configuration */
  FDPO_ERR_IO = 11,
  FDPO_ERR_INTERNAL = 12
} fdpo_status;

FDPO_API const char *fdpo_version(void);
FDPO_API const char *fdpo_status_name(fdpo_status status);

/* Message describing the most recent failure on the calling thread; valid
 * until the next fdpo call on the same thread. */
FDPO_API const char *fdpo_last_error(void);

/* ---- divergence kernels ------------------------------------------------ */

typedef struct fdpo_divergence fdpo_divergence;

/* name: "reverse-kl", "forward-kl", "alpha:<value>" (value in (0,1)), "js". */
FDPO_API fdpo_status fdpo_divergence_create(const char *name, fdpo_divergence **out);
FDPO_API void fdpo_divergence_destroy(fdpo_divergence *divergence);
FDPO_API const char *fdpo_divergence_name(const fdpo_divergence *divergence);

FDPO_API fdpo_status fdpo_f_eval(const fdpo_divergence *divergence, double x, double *out);
FDPO_API fdpo_status fdpo_f_prime(const fdpo_divergence *divergence, double x, double *out);
FDPO_API fdpo_status fdpo_f_double_prime(const fdpo_divergence *divergence, double x,
                                         double *out);
FDPO_API fdpo_status fdpo_f_prime_inverse(const fdpo_divergence *divergence, double y,
                                          double *out);

/* D_f(p1||p2) over two length-n probability vectors (each summing to 1
 * within 1e-9; the support of p1 must be dominated by p2). */
FDPO_API fdpo_status fdpo_divergence_value(const fdpo_divergence *divergence,
                                           const double *p1, const double *p2, size_t n,
                                           double *out);

/* ---- pairwise alignment loss ------------------------------------------- */

FDPO_API fdpo_status fdpo_loss(const fdpo_divergence *divergence, double beta, double x1,
                               double x2, double *out);
FDPO_API fdpo_status fdpo_loss_gradients(const fdpo_divergence *divergence, double beta,
                                         double x1, double x2, double *d_x1, double *d_x2);
FDPO_API fdpo_status fdpo_closed_form_gradients(const fdpo_divergence *divergence,
                                                double beta, double x1, double x2,
                                                double *d_x1, double *d_x2);
FDPO_API fdpo_status fdpo_gradient_ratio(const fdpo_divergence *divergence, double x1,
                                         double x2, double *out);
FDPO_API fdpo_status fdpo_sigma_bt(double r_w, double r_l, double *out);

/* Gradient ratios of the whole kernel family at (x1, x2) with 0 < x2 < x1,
 * sorted ascending; verifies the strict ordering chains internally.
 * ratios must hold FDPO_ORDERING_COUNT doubles; labels (optional, may be
 * NULL) receives that many pointers to static strings. */
#define FDPO_ORDERING_COUNT 7
FDPO_API fdpo_status fdpo_ratio_ordering(double x1, double x2, double *ratios,
                                         const char **labels);

/* ---- optimal-policy solver ---------------------------------------------- */

/* Maximize E_pi[q] - beta D_f(pi||pi_ref) over the n-simplex. policy_out
 * must hold n doubles. */
FDPO_API fdpo_status fdpo_solve_optimal_policy(const fdpo_divergence *divergence, double beta,
                                               const double *q, const double *pi_ref, size_t n,
                                               double *policy_out, double *lambda_out,
                                               double *residual_out);
FDPO_API fdpo_status fdpo_reward_reparameterize(const fdpo_divergence *divergence, double beta,
                                                double p_theta, double p_ref, double *out);
FDPO_API fdpo_status fdpo_recover_q(const fdpo_divergence *divergence, double beta,
                                    const double *policy, const double *pi_ref, size_t n,
                                    double lambda, double *q_out);

/* ---- toy preference training -------------------------------------------- */

/* Runs one training from a JSON config (see the project README for the
 * schema) and returns the result documents as heap strings; free each with
 * fdpo_string_free. Any output pointer may be NULL to skip that document. */
FDPO_API fdpo_status fdpo_train_run(const char *config_json, char **effective_config_json,
                                    char **trace_csv, char **policy_json, char **samples_csv,
                                    char **summary_json);
FDPO_API void fdpo_string_free(char *s);

/* ---- image diversity metrics -------------------------------------------- */
/* Images are dense row-major 8-bit grayscale buffers of width*height bytes. */

FDPO_API fdpo_status fdpo_entropy_1d(const uint8_t *pixels, uint32_t width, uint32_t height,
                                     double *out);
FDPO_API fdpo_status fdpo_entropy_2d(const uint8_t *pixels, uint32_t width, uint32_t height,
                                     uint32_t neighborhood, double *out);
FDPO_API fdpo_status fdpo_rmse(const uint8_t *a, const uint8_t *b, uint32_t width,
                               uint32_t height, double *out);
/* Identical images have infinite PSNR: *out_is_infinite is set to 1 and
 * *out_db is not meaningful. */
FDPO_API fdpo_status fdpo_psnr(const uint8_t *a, const uint8_t *b, uint32_t width,
                               uint32_t height, double *out_db, int *out_is_infinite);
FDPO_API fdpo_status fdpo_ssim(const uint8_t *a, const uint8_t *b, uint32_t width,
                               uint32_t height, double *out);
FDPO_API fdpo_status fdpo_fsim(const uint8_t *a, const uint8_t *b, uint32_t width,
                               uint32_t height, double *out);

/* ---- 2-D sample-set helpers ---------------------------------------------- */
/* Point sets are packed as x0,y0,x1,y1,... */

FDPO_API fdpo_status fdpo_sample_diversity(const double *xy, size_t n_samples,
                                           const double *centers_xy, size_t n_centers,
                                           double radius, uint32_t *coverage_out,
                                           double *mean_pairwise_out);
/* Histogram raster over [-extent, extent]^2; pixels_out must hold grid*grid
 * bytes. */
FDPO_API fdpo_status fdpo_rasterize(const double *xy, size_t n_samples, uint32_t grid,
                                    double extent, uint8_t *pixels_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FDPO_H */
