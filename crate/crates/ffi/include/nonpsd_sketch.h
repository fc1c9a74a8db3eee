#ifndef NONPSD_SKETCH_H
#define NONPSD_SKETCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NsStatus {
  NS_STATUS_OK = 0,
  NS_STATUS_INVALID_INPUT = 1,
  NS_STATUS_RANK_DEFICIENT = 2,
  NS_STATUS_BUDGET = 3,
  NS_STATUS_PARSE = 4,
  NS_STATUS_CONFIG = 5,
  NS_STATUS_IO = 6,
  NS_STATUS_NULL_POINTER = 7,
  NS_STATUS_PANIC = 8,
} NsStatus;

typedef enum NsLoss {
  NS_LOSS_NLLS = 0,
  NS_LOSS_TUKEY = 1,
  NS_LOSS_QUADRATIC = 2,
} NsLoss;

typedef enum NsMethod {
  NS_METHOD_NEWTON_CG = 0,
  NS_METHOD_NEWTON_MR = 1,
  NS_METHOD_TRUST_REGION = 2,
} NsMethod;

// Opaque finite-sum problem.
typedef struct NsProblem NsProblem;

// Opaque TensorSketch accumulator.
typedef struct NsTensorSketch NsTensorSketch;

// Outcome of [`ns_optimize`]. `status` follows the order converged,
// max iterations, budget exhausted, line search failed, radius underflow.
typedef struct NsOptSummary {
  uint32_t status;
  size_t iterations;
  double oracle_calls;
  double final_objective;
  double final_grad_norm;
} NsOptSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `cap`). Returns the full message length excluding the NUL.
//
// # Safety
// `buf` must be null or valid for `cap` bytes.
size_t ns_last_error(char *buf, size_t cap);

// Library version as a static NUL-terminated string.
const char *ns_version(void);

// Exact leverage scores of a complex `rows×cols` matrix into `out[rows]`.
//
// # Safety
// `b` must hold `2·rows·cols` doubles and `out` `rows` doubles.
enum NsStatus ns_leverage_scores(const double *b, size_t rows, size_t cols, double *out);

// Approximate leverage scores; zero `embed_rows` or `jl_cols` selects the default.
//
// # Safety
// As for [`ns_leverage_scores`].
enum NsStatus ns_approx_leverage_scores(const double *b,
                                        size_t rows,
                                        size_t cols,
                                        size_t embed_rows,
                                        size_t jl_cols,
                                        uint64_t seed,
                                        double *out);

// Creates a real finite-sum problem from a row-major `n×d` matrix and `n` labels.
//
// # Safety
// `a` must hold `n·d` doubles, `labels` `n` doubles, `out` must be writable.
enum NsStatus ns_problem_new(const double *a,
                             size_t n,
                             size_t d,
                             const double *labels,
                             enum NsLoss loss,
                             double lambda,
                             struct NsProblem **out);

// # Safety
// `p` must come from [`ns_problem_new`] and not be used afterwards.
void ns_problem_free(struct NsProblem *p);

// Runs one optimizer from `x = 0`. `scheme` is a name such as `"LS"`,
// `"RN-MX"`, `"Full"` or `"LS-Det(0.5)"`. The final iterate is written to
// `x_out[d]` when non-null.
//
// # Safety
// `p` must be a live problem, `scheme` a NUL-terminated string, `x_out`
// null or valid for `d` doubles, `summary` null or writable.
enum NsStatus ns_optimize(const struct NsProblem *p,
                          enum NsMethod method,
                          const char *scheme,
                          size_t sample_size,
                          size_t max_outer,
                          double grad_tol,
                          uint64_t seed,
                          double *x_out,
                          struct NsOptSummary *summary);

// Sketch-and-solve complex ℓp regression `min ‖Ax − b‖_p`; pass
// `p = INFINITY` for the max norm. `size` is the block height `t` for finite
// `p` and the sign count `s` for `p = ∞`. Writes `xhat[d]` (interleaved).
//
// # Safety
// `a` must hold `2·n·d` doubles, `b` `2·n`, `xhat` `2·d`.
enum NsStatus ns_lp_sketch_solve(const double *a,
                                 size_t n,
                                 size_t d,
                                 const double *b,
                                 double p,
                                 size_t size,
                                 uint64_t seed,
                                 double *xhat);

// # Safety
// `out` must be writable.
enum NsStatus ns_tensor_sketch_new(size_t k, uint64_t seed, struct NsTensorSketch **out);

// Adds the pair `(a, b)`, both complex of length `d`.
//
// # Safety
// `ts` must be live; `a` and `b` must hold `2·d` doubles.
enum NsStatus ns_tensor_sketch_ingest(struct NsTensorSketch *ts,
                                      const double *a,
                                      const double *b,
                                      size_t d);

// Estimates `uᵀ(AᵀB)v` from the ingested pairs into `out[2]` as `(re, im)`.
//
// # Safety
// `ts` must be live; `u` and `v` must hold `2·d` doubles, `out` 2 doubles.
enum NsStatus ns_tensor_sketch_estimate(const struct NsTensorSketch *ts,
                                        const double *u,
                                        const double *v,
                                        size_t d,
                                        double *out);

// # Safety
// `ts` must come from [`ns_tensor_sketch_new`] and not be used afterwards.
void ns_tensor_sketch_free(struct NsTensorSketch *ts);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NONPSD_SKETCH_H */
