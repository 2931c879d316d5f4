#ifndef REPLICA_PORTFOLIO_H
#define REPLICA_PORTFOLIO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  RP_STATUS_OK = 0,
  RP_STATUS_NULL_POINTER = 1,
  RP_STATUS_INVALID_ARGUMENT = 2,
  RP_STATUS_SINGULAR_WISHART = 3,
  RP_STATUS_DEGENERATE_MEAN_VECTOR = 4,
  RP_STATUS_INFEASIBLE_RISK_LEVEL = 5,
  RP_STATUS_INVALID_SCENARIO_RATIO = 6,
  RP_STATUS_UNDEFINED_TANGENCY = 7,
  RP_STATUS_ILL_CONDITIONED_ELIMINATION = 8,
  RP_STATUS_INSUFFICIENT_VALID_SAMPLES = 9,
  RP_STATUS_BUFFER_TOO_SMALL = 10,
  RP_STATUS_PANIC = 99,
} RpStatus;

typedef enum {
  RP_DISTRIBUTION_GAUSSIAN = 0,
  RP_DISTRIBUTION_UNIFORM = 1,
} RpDistribution;

typedef enum {
  RP_BRANCH_MAXIMIZE = 0,
  RP_BRANCH_MINIMIZE = 1,
} RpBranch;

typedef enum {
  RP_SWEEP_KIND_PRIMAL_OVER_R = 0,
  RP_SWEEP_KIND_DUAL_OVER_EPS = 1,
} RpSweepKind;

/**
 * Opaque disorder sample.
 */
typedef struct RpSample RpSample;

/**
 * Opaque sweep result.
 */
typedef struct RpSweepResult RpSweepResult;

typedef struct {
  size_t n_assets;
  size_t n_scenarios;
  double return_variance;
  double mean_of_means;
  double variance_of_means;
  RpDistribution return_dist;
  RpDistribution mean_dist;
  uint64_t master_seed;
} RpMarketParams;

typedef struct {
  double a;
  double b;
  double c;
  double d_discriminant;
} RpProjectionScalars;

typedef struct {
  double target_return;
  double epsilon;
  double k;
  double theta;
  double q_w;
  double sharpe;
} RpPrimalSolution;

typedef struct {
  double target_risk;
  double r_extremal;
  RpBranch branch;
  double k;
  double theta;
  double q_w;
  double sharpe;
} RpDualSolution;

typedef struct {
  double alpha;
  double return_variance;
  double mean_of_means;
  double variance_of_means;
} RpMoments;

typedef struct {
  double x_value;
  double epsilon_or_return;
  double q_w;
  double sharpe;
} RpTheoryPoint;

typedef struct {
  double s_max;
  double r_star;
  double eps_star;
} RpMaxSharpe;

typedef struct {
  double x_value;
  double mean_primary;
  double se_primary;
  double mean_qw;
  double se_qw;
  double mean_sharpe;
  double se_sharpe;
  size_t n_ok;
  size_t n_failed;
} RpPointStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rp_version(void);

/**
 * Length in bytes (without the NUL) of the calling thread's last error
 * message, or 0 if the last call succeeded.
 */
size_t rp_last_error_length(void);

/**
 * Copies the last error message into `buf` (truncated, always
 * NUL-terminated). Returns the number of bytes written without the NUL.
 */
size_t rp_last_error_message(char *buf, size_t len);

/**
 * Draws sample `sample_index` of the ensemble into a new handle.
 */
RpStatus rp_sample_generate(const RpMarketParams *params, uint64_t sample_index, RpSample **out);

/**
 * Builds a sample from an explicit scaled return matrix (`n_assets` rows of
 * `n_scenarios` values, row-major) and mean vector.
 */
RpStatus rp_sample_from_parts(size_t n_assets,
                              size_t n_scenarios,
                              const double *x_scaled_row_major,
                              const double *means,
                              RpSample **out);

void rp_sample_free(RpSample *sample);

/**
 * Number of assets N of a sample, 0 for a null handle.
 */
size_t rp_sample_n_assets(const RpSample *sample);

RpStatus rp_projection_scalars(const RpSample *sample, RpProjectionScalars *out);

/**
 * Minimal risk at expected return `target_return`. `portfolio` may be null;
 * otherwise it must hold at least N values.
 */
RpStatus rp_solve_primal(const RpSample *sample,
                         double target_return,
                         RpPrimalSolution *out,
                         double *portfolio,
                         size_t portfolio_len);

/**
 * Same contract as [`rp_solve_primal`], via the constraint-elimination oracle.
 */
RpStatus rp_qp_oracle(const RpSample *sample,
                      double target_return,
                      RpPrimalSolution *out,
                      double *portfolio,
                      size_t portfolio_len);

RpStatus rp_solve_dual(const RpSample *sample,
                       double target_risk,
                       RpBranch which,
                       RpDualSolution *out,
                       double *portfolio,
                       size_t portfolio_len);

RpStatus rp_quenched_primal(const RpMoments *m, double target_return, RpTheoryPoint *out);

RpStatus rp_quenched_dual(const RpMoments *m, double eps_prime, RpBranch which, RpTheoryPoint *out);

RpStatus rp_annealed_primal(const RpMoments *m, double target_return, RpTheoryPoint *out);

RpStatus rp_annealed_dual(const RpMoments *m, double eps_prime, RpTheoryPoint *out);

RpStatus rp_max_sharpe(const RpMoments *m, RpMaxSharpe *out);

/**
 * Runs a configuration average over `n_samples` samples. `which` is only
 * read for dual sweeps.
 */
RpStatus rp_sweep_run(const RpMarketParams *params,
                      RpSweepKind kind,
                      RpBranch which,
                      const double *grid,
                      size_t grid_len,
                      size_t n_samples,
                      RpSweepResult **out);

size_t rp_sweep_point_count(const RpSweepResult *result);

RpStatus rp_sweep_point(const RpSweepResult *result, size_t index, RpPointStats *out);

/**
 * Quenched theory at point `index`; `*has_value` is false where the formula
 * is undefined (e.g. an infeasible risk level).
 */
RpStatus rp_sweep_theory_quenched(const RpSweepResult *result,
                                  size_t index,
                                  RpTheoryPoint *out,
                                  bool *has_value);

/**
 * Compares the sweep with its quenched theory curve.
 */
RpStatus rp_sweep_compare(const RpSweepResult *result, bool *verdict, double *pass_fraction);

void rp_sweep_free(RpSweepResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REPLICA_PORTFOLIO_H */
