#ifndef AMPLIFY_DP_H
#define AMPLIFY_DP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

// Result code of every fallible call.
typedef enum AdpStatus {
  ADP_STATUS_OK = 0,
  ADP_STATUS_NULL_POINTER = 1,
  ADP_STATUS_INVALID_ARGUMENT = 2,
  ADP_STATUS_INVALID_KERNEL = 3,
  ADP_STATUS_INVALID_DISTRIBUTION = 4,
  ADP_STATUS_DIMENSION_MISMATCH = 5,
  ADP_STATUS_NUMERICAL_FAILURE = 6,
  // A bug inside the library; the message carries the panic text.
  ADP_STATUS_PANIC = 7,
} AdpStatus;

// Discrete distribution over the labels `0..n`.
typedef struct AdpDist AdpDist;

// Row-stochastic matrix.
typedef struct AdpKernel AdpKernel;

// The four mixing coefficients of a kernel. `eps_dobrushin` is measured at
// the order requested by the caller.
typedef struct AdpCoefficients {
  double eps_dobrushin;
  double dobrushin;
  double doeblin;
  double ultra;
} AdpCoefficients;

typedef struct AdpGuarantee {
  double epsilon;
  double delta;
} AdpGuarantee;

// Amplified guarantees of `K ∘ M` under each mixing condition.
typedef struct AdpAmplification {
  struct AdpGuarantee dobrushin;
  struct AdpGuarantee eps_dobrushin;
  struct AdpGuarantee doeblin;
  struct AdpGuarantee ultra;
} AdpAmplification;

typedef struct AdpSgdConfig {
  size_t n;
  double lipschitz;
  double beta;
  double rho;
  double eta;
  double sigma;
} AdpSgdConfig;

typedef struct AdpOuParams {
  double theta;
  double rho;
  double t;
  double delta;
  double radius;
  size_t d;
} AdpOuParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread. The pointer stays
// valid until the next failing call on the same thread.
const char *adp_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *adp_version(void);

// Builds a kernel from `n_inputs * n_outputs` row-major entries. Rows may
// be off unit mass by at most 1e-9 and are renormalized.
//
// # Safety
// `rows` must point to `n_inputs * n_outputs` readable doubles and `out`
// must be writable.
enum AdpStatus adp_kernel_new(const double *rows,
                              size_t n_inputs,
                              size_t n_outputs,
                              struct AdpKernel **out);

// # Safety
// `kernel` must come from `adp_kernel_new` and not be freed already; null
// is ignored.
void adp_kernel_free(struct AdpKernel *kernel);

// # Safety
// `kernel` must be a live handle and `out` writable.
enum AdpStatus adp_kernel_coefficients(const struct AdpKernel *kernel,
                                       double eps,
                                       struct AdpCoefficients *out);

// Amplifies an `(ε, δ)` guarantee by post-processing with `kernel` under
// each mixing condition. The (γ,ε)-Dobrushin coefficient is measured at
// `log(1 + (e^ε − 1)/δ)`.
//
// # Safety
// `kernel` must be a live handle and `out` writable.
enum AdpStatus adp_amplify(const struct AdpKernel *kernel,
                           double epsilon,
                           double delta,
                           struct AdpAmplification *out);

// Builds a distribution over the labels `0..n`; `probs` must sum to 1
// within 1e-12.
//
// # Safety
// `probs` must point to `n` readable doubles and `out` must be writable.
enum AdpStatus adp_dist_new(const double *probs, size_t n, struct AdpDist **out);

// # Safety
// `dist` must come from this library and not be freed already; null is
// ignored.
void adp_dist_free(struct AdpDist *dist);

// Number of support points; 0 for a null handle.
//
// # Safety
// `dist` must be null or a live handle.
size_t adp_dist_len(const struct AdpDist *dist);

// Copies the probabilities into `buf`, which must hold `len` doubles with
// `len` equal to `adp_dist_len(dist)`.
//
// # Safety
// `dist` must be a live handle and `buf` writable for `len` doubles.
enum AdpStatus adp_dist_probs(const struct AdpDist *dist, double *buf, size_t len);

// `μK` as a new handle.
//
// # Safety
// Both handles must be live and `out` writable.
enum AdpStatus adp_pushforward(const struct AdpDist *mu,
                               const struct AdpKernel *kernel,
                               struct AdpDist **out);

// `D_{e^ε}(μ‖ν)`; `eps` may be `INFINITY`.
//
// # Safety
// Both handles must be live and `out` writable.
enum AdpStatus adp_hockey_stick(const struct AdpDist *mu,
                                const struct AdpDist *nu,
                                double eps,
                                double *out);

// # Safety
// Both handles must be live and `out` writable.
enum AdpStatus adp_total_variation(const struct AdpDist *mu, const struct AdpDist *nu, double *out);

// Rényi divergence of order `alpha > 1` (`INFINITY` allowed).
//
// # Safety
// Both handles must be live and `out` writable.
enum AdpStatus adp_renyi_discrete(const struct AdpDist *mu,
                                  const struct AdpDist *nu,
                                  double alpha,
                                  double *out);

// `α‖u − v‖²/(2σ²)` for two points of dimension `dim`.
//
// # Safety
// `u` and `v` must point to `dim` readable doubles and `out` be writable.
enum AdpStatus adp_renyi_gaussian(const double *u,
                                  const double *v,
                                  size_t dim,
                                  double sigma2,
                                  double alpha,
                                  double *out);

// Optimized two-stage Laplace Rényi bound.
//
// # Safety
// `out` must be writable.
enum AdpStatus adp_iterated_laplace_bound(double delta,
                                          double lambda1,
                                          double lambda2,
                                          double alpha,
                                          double *out);

// Contraction factor of a gradient step on a β-smooth ρ-strongly convex loss.
//
// # Safety
// `out` must be writable.
enum AdpStatus adp_contraction_coeff(double beta, double rho, double eta, double *out);

// Per-unit-order privacy loss `ε_i` of noisy projected SGD at the 1-based
// index `i`; the RDP level at order α is `α·ε_i`.
//
// # Safety
// `cfg` must be readable and `out` writable.
enum AdpStatus adp_sgd_epsilon(const struct AdpSgdConfig *cfg, size_t i, double *out);

// RDP level `αΛ(t)` of the Ornstein-Uhlenbeck mechanism.
//
// # Safety
// `params` must be readable and `out` writable.
enum AdpStatus adp_ou_rdp(const struct AdpOuParams *params, double alpha, double *out);

// OU parameters at `t = 1` meeting the RDP slope `epsilon`.
//
// # Safety
// `out` must be writable.
enum AdpStatus adp_plan_ou(double epsilon,
                           double delta,
                           double radius,
                           size_t d,
                           struct AdpOuParams *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AMPLIFY_DP_H */
