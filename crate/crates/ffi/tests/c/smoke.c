#include <math.h>
#include <stdio.h>
#include <string.h>

#include "rnvsim.h"

#define CHECK(cond)                                                        \
  do {                                                                     \
    if (!(cond)) {                                                         \
      const char *e = rnv_last_error();                                    \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, e ? e : "-"); \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  RnvConfig *cfg = NULL;
  CHECK(rnv_config_parse("grid.n_steps = 30\nscenarios.count = 100\n", &cfg) == RNV_STATUS_OK);
  CHECK(rnv_config_set(cfg, "technical.count", "4") == RNV_STATUS_OK);
  CHECK(rnv_config_set(cfg, "no.such.key", "1") == RNV_STATUS_VALIDATION);
  CHECK(strstr(rnv_last_error(), "no.such.key") != NULL);
  CHECK(rnv_config_validate(cfg) == RNV_STATUS_OK);

  RnvRun *run = NULL;
  CHECK(rnv_simulate(cfg, 5, &run) == RNV_STATUS_OK);
  CHECK(rnv_run_len(run) == 30);

  double prices[30];
  size_t n = 0;
  CHECK(rnv_run_prices(run, prices, 30, &n) == RNV_STATUS_OK && n == 30);
  RnvStepRow row;
  CHECK(rnv_run_row(run, 29, &row) == RNV_STATUS_OK);
  CHECK(row.step == 29 && row.price == prices[29]);
  CHECK(rnv_run_row(run, 30, &row) == RNV_STATUS_INVALID_ARGUMENT);

  RnvRunSummary s;
  CHECK(rnv_run_summary(run, &s) == RNV_STATUS_OK);
  uint64_t h = 0;
  CHECK(rnv_config_hash(cfg, &h) == RNV_STATUS_OK && h == s.config_hash);
  printf("final price %.6f, hash %016llx\n", s.final_price, (unsigned long long)h);

  double xs[10] = {10, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  double k = 0, jb = 0, p = 0;
  CHECK(rnv_excess_kurtosis(xs, 10, &k) == RNV_STATUS_OK && fabs(k - 46.0 / 9.0) < 1e-12);
  CHECK(rnv_jarque_bera(xs, 10, &jb, &p) == RNV_STATUS_OK && fabs(p - exp(-jb / 2)) < 1e-15);
  CHECK(rnv_excess_kurtosis(xs, 3, &k) == RNV_STATUS_VALIDATION);

  RnvGirsanovReport g;
  CHECK(rnv_girsanov_check(0.0, 0.2, 1.0, 0.2, 4000, 20, 1, &g) == RNV_STATUS_OK && g.pass);
  CHECK(rnv_simulate(NULL, 1, &run) == RNV_STATUS_INVALID_ARGUMENT);

  rnv_run_free(run);
  rnv_config_free(cfg);
  puts("ok");
  return 0;
}
