#ifndef SADDLENET_H
#define SADDLENET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SnStatus {
  SN_STATUS_OK = 0,
  SN_STATUS_NULL_POINTER = 1,
  SN_STATUS_INVALID_ARGUMENT = 2,
  SN_STATUS_DIMENSION_MISMATCH = 3,
  SN_STATUS_INVALID_SCHEDULE = 4,
  SN_STATUS_DISCONNECTED = 5,
  SN_STATUS_UNSUPPORTED = 6,
  SN_STATUS_NOT_CONVERGED = 7,
  SN_STATUS_PARSE = 8,
  SN_STATUS_BUFFER_TOO_SMALL = 9,
  SN_STATUS_PANIC = 10,
  SN_STATUS_OTHER = 11,
} SnStatus;

typedef enum SnTopology {
  SN_TOPOLOGY_PATH = 0,
  SN_TOPOLOGY_STAR = 1,
  SN_TOPOLOGY_COMPLETE = 2,
  SN_TOPOLOGY_RING = 3,
} SnTopology;

typedef enum SnLocalRule {
  SN_LOCAL_RULE_EXTRA_STEP = 0,
  SN_LOCAL_RULE_DESCENT_ASCENT = 1,
} SnLocalRule;

typedef enum SnRunStatus {
  SN_RUN_STATUS_CONVERGED = 0,
  SN_RUN_STATUS_BUDGET_EXHAUSTED = 1,
  SN_RUN_STATUS_DIVERGED = 2,
} SnRunStatus;

typedef enum SnProbeAlgorithm {
  SN_PROBE_ALGORITHM_CENTRALIZED = 0,
  SN_PROBE_ALGORITHM_DECENTRALIZED = 1,
  SN_PROBE_ALGORITHM_LOCAL_EXTRA_STEP = 2,
} SnProbeAlgorithm;

/**
 * Opaque problem handle.
 */
typedef struct SnProblem SnProblem;

/**
 * Opaque run-result handle.
 */
typedef struct SnRun SnRun;

/**
 * Step sizes, budgets and seeds of a run.
 */
typedef struct SnRunConfig {
  double sigma2;
  uint64_t seed;
  double gamma;
  /**
   * Record every this many iterations; 0 is treated as 1.
   */
  uint64_t checkpoint_every;
} SnRunConfig;

/**
 * One trajectory checkpoint; absent metrics are NaN.
 */
typedef struct SnCheckpoint {
  uint64_t t;
  uint64_t comm_rounds;
  uint64_t oracle_calls;
  double dist_sq;
  double gap;
  double grad_norm_sq;
  double consensus_err;
} SnCheckpoint;

typedef struct SnZeroChainSummary {
  uint64_t comm_rounds_used;
  uint64_t final_frontier;
  uint64_t cap;
  bool pass;
} SnZeroChainSummary;

typedef struct SnSolutionBound {
  double err;
  double err_structured;
  double bound;
  bool pass;
} SnSolutionBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t sn_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sn_version(void);

/**
 * Random bilinear games on `[-1, 1]^{2n}`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum SnStatus sn_problem_bilinear(size_t n,
                                  size_t nodes,
                                  double lambda_max,
                                  double coef_bound,
                                  uint64_t seed,
                                  struct SnProblem **out);

/**
 * Lower-bound construction on a path of `delta + 1` nodes (unconstrained).
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum SnStatus sn_problem_lower_bound(double l,
                                     double mu,
                                     size_t n,
                                     size_t delta,
                                     struct SnProblem **out);

/**
 * Parses a problem from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a valid handle slot.
 */
enum SnStatus sn_problem_from_json(const char *json, struct SnProblem **out);

/**
 * Writes the JSON form into `buf` (NUL-terminated). `needed` receives the
 * byte length including the terminator, also on `BufferTooSmall`.
 *
 * # Safety
 * `problem` must be a live handle; `buf` null or `len` writable bytes;
 * `needed` null or writable.
 */
enum SnStatus sn_problem_to_json(const struct SnProblem *problem,
                                 char *buf,
                                 size_t len,
                                 size_t *needed);

/**
 * New problem with `mu_reg·(z − anchor)` added to every node.
 *
 * # Safety
 * `problem` must be a live handle, `anchor` `len` readable doubles, `out` a
 * valid handle slot.
 */
enum SnStatus sn_problem_regularize(const struct SnProblem *problem,
                                    double mu_reg,
                                    const double *anchor,
                                    size_t len,
                                    struct SnProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle returned by this library, freed once.
 */
void sn_problem_free(struct SnProblem *problem);

/**
 * Dimension `n_x + n_y`, or 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t sn_problem_dim(const struct SnProblem *problem);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t sn_problem_nodes(const struct SnProblem *problem);

/**
 * `L`, `L_max` and `μ`; any output pointer may be null.
 *
 * # Safety
 * `problem` must be a live handle; outputs null or writable.
 */
enum SnStatus sn_problem_constants(const struct SnProblem *problem,
                                   double *l,
                                   double *l_max,
                                   double *mu);

/**
 * Averaged operator `F(z)` into `out` (length `len` = dimension).
 *
 * # Safety
 * `z` and `out` must hold `len` doubles.
 */
enum SnStatus sn_problem_eval_mean(const struct SnProblem *problem,
                                   const double *z,
                                   double *out,
                                   size_t len);

/**
 * Gap of the averaged game at `z`.
 *
 * # Safety
 * `z` must hold `len` doubles; `out` must be writable.
 */
enum SnStatus sn_problem_gap(const struct SnProblem *problem,
                             const double *z,
                             size_t len,
                             double *out);

/**
 * Reference solution by deterministic extragradient.
 *
 * # Safety
 * `out` must hold `len` doubles; `residual` null or writable.
 */
enum SnStatus sn_problem_reference(const struct SnProblem *problem,
                                   double tol,
                                   uint64_t max_iters,
                                   double *out,
                                   size_t len,
                                   double *residual);

/**
 * Server-based extragradient with budgets `K`, `T` and server distance `r`.
 * `z0` and `reference` may be null (origin start, no distance metric).
 *
 * # Safety
 * Non-null vectors must hold `sn_problem_dim` doubles; `out` a handle slot.
 */
enum SnStatus sn_run_centralized(const struct SnProblem *problem,
                                 const struct SnRunConfig *cfg,
                                 size_t comm_budget,
                                 size_t oracle_budget,
                                 size_t r,
                                 const double *z0,
                                 const double *reference,
                                 struct SnRun **out);

/**
 * Gossip extragradient on a named topology with `P` FastMix rounds.
 *
 * # Safety
 * As for [`sn_run_centralized`].
 */
enum SnStatus sn_run_decentralized(const struct SnProblem *problem,
                                   const struct SnRunConfig *cfg,
                                   enum SnTopology topology,
                                   size_t comm_budget,
                                   size_t oracle_budget,
                                   size_t p,
                                   const double *z0,
                                   const double *reference,
                                   struct SnRun **out);

/**
 * Local method with averaging every `h` steps (and at the last step).
 *
 * # Safety
 * As for [`sn_run_centralized`].
 */
enum SnStatus sn_run_local(const struct SnProblem *problem,
                           const struct SnRunConfig *cfg,
                           enum SnLocalRule rule,
                           size_t steps,
                           size_t h,
                           const double *z0,
                           const double *reference,
                           struct SnRun **out);

/**
 * # Safety
 * `run` must be null or a handle returned by this library, freed once.
 */
void sn_run_free(struct SnRun *run);

/**
 * Budgets and status of a finished run; any output may be null.
 *
 * # Safety
 * `run` must be a live handle; outputs null or writable.
 */
enum SnStatus sn_run_summary(const struct SnRun *run,
                             enum SnRunStatus *status,
                             uint64_t *comm_rounds_used,
                             uint64_t *oracle_samples_per_node,
                             uint64_t *checkpoints);

/**
 * The algorithm's official output point.
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
enum SnStatus sn_run_output(const struct SnRun *run, double *out, size_t len);

/**
 * Checkpoint `index`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SnStatus sn_run_checkpoint(const struct SnRun *run, size_t index, struct SnCheckpoint *out);

/**
 * Gossip condition number `χ` of a named topology.
 *
 * # Safety
 * `out` must be writable.
 */
enum SnStatus sn_gossip_chi(enum SnTopology topology, size_t nodes, double *out);

/**
 * `rounds` of FastMix on a row-major `nodes × dim` matrix.
 *
 * # Safety
 * `z` and `out` must hold `nodes·dim` doubles.
 */
enum SnStatus sn_fastmix(enum SnTopology topology,
                         size_t nodes,
                         size_t dim,
                         size_t rounds,
                         const double *z,
                         double *out);

/**
 * Zero-chain probe with `γ = 1/(4L)` and one FastMix round.
 *
 * # Safety
 * `out` must be writable.
 */
enum SnStatus sn_probe_zero_chain(enum SnProbeAlgorithm algorithm,
                                  double l,
                                  double mu,
                                  size_t n,
                                  size_t delta,
                                  size_t comm_budget,
                                  size_t oracle_budget,
                                  struct SnZeroChainSummary *out);

/**
 * Error of the geometric approximation to the construction's solution.
 *
 * # Safety
 * `out` must be writable.
 */
enum SnStatus sn_probe_solution_bound(double l, double mu, size_t n, struct SnSolutionBound *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SADDLENET_H */
