#include <math.h>
#include <stdio.h>
#include <string.h>

#include "saddlenet.h"

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #cond); \
      return 1;                                                  \
    }                                                            \
  } while (0)

int main(void) {
  SnProblem *base = NULL;
  SnProblem *p = NULL;
  SnRun *run = NULL;
  double zero[8] = {0};
  double l = 0.0, z_star[8], residual = 1.0;
  char msg[256];

  CHECK(strlen(sn_version()) > 0);
  CHECK(sn_problem_bilinear(4, 3, 10.0, 5.0, 1, &base) == SN_STATUS_OK);
  CHECK(sn_problem_dim(base) == 8 && sn_problem_nodes(base) == 3);
  CHECK(sn_problem_regularize(base, 0.5, zero, 8, &p) == SN_STATUS_OK);
  CHECK(sn_problem_constants(p, &l, NULL, NULL) == SN_STATUS_OK && l > 0.0);
  CHECK(sn_problem_reference(p, 1e-11, 1000000, z_star, 8, &residual) == SN_STATUS_OK);

  SnRunConfig cfg = {.sigma2 = 0.0, .seed = 7, .gamma = 1.0 / (4.0 * l), .checkpoint_every = 10};
  CHECK(sn_run_centralized(p, &cfg, 50, 100, 1, NULL, z_star, &run) == SN_STATUS_OK);
  uint64_t count = 0;
  CHECK(sn_run_summary(run, NULL, NULL, NULL, &count) == SN_STATUS_OK && count > 1);
  SnCheckpoint first, last;
  CHECK(sn_run_checkpoint(run, 0, &first) == SN_STATUS_OK);
  CHECK(sn_run_checkpoint(run, count - 1, &last) == SN_STATUS_OK);
  CHECK(last.dist_sq < first.dist_sq);
  CHECK(isnan(last.consensus_err) || last.consensus_err >= 0.0);
  sn_run_free(run);

  CHECK(sn_run_centralized(NULL, &cfg, 50, 100, 1, NULL, NULL, &run) == SN_STATUS_NULL_POINTER);
  CHECK(sn_last_error_message(msg, sizeof msg) > 0);

  SnZeroChainSummary zc;
  CHECK(sn_probe_zero_chain(SN_PROBE_ALGORITHM_DECENTRALIZED, 10.0, 1.0, 16, 4, 8, 40, &zc) == SN_STATUS_OK);
  CHECK(zc.pass);

  sn_problem_free(p);
  sn_problem_free(base);
  puts("ok");
  return 0;
}
