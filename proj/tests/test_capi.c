#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "activeflow/activeflow.h"

static int failures = 0;

#define CHECK(cond)                                                 \
  do {                                                              \
    if (!(cond)) {                                                  \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                   \
    }                                                               \
  } while (0)

static char captured[4096];

static void capture(const char* text, size_t len, void* user) {
  (void)user;
  size_t used = strlen(captured);
  if (used + len >= sizeof captured) len = sizeof captured - used - 1;
  memcpy(captured + used, text, len);
  captured[used + len] = '\0';
}

int main(void) {
  af_grid* grid = NULL;
  CHECK(af_grid_create(7, 8, &grid) == AF_ERR_INVALID_ARGUMENT);
  CHECK(strlen(af_last_error()) > 0);
  CHECK(strcmp(af_status_name(AF_ERR_NUMERICAL_BLOWUP), "NumericalBlowup") == 0);

  CHECK(af_grid_create(8, 8, &grid) == AF_OK);
  af_field* field = NULL;
  const char* spec = "{\"kind\": \"single_mode\", \"mass\": 24.8, \"amplitude\": 0.5, \"mode\": [1, 0, 0]}";
  CHECK(af_field_from_initial(grid, spec, &field) == AF_OK);
  CHECK(af_field_size(field) == 512);

  double m0 = 0.0, m1 = 0.0;
  CHECK(af_field_mean(field, &m0) == AF_OK);
  CHECK(fabs(m0 - 24.8 / pow(2.0 * M_PI, 3)) < 1e-14);

  af_params p = {0.05, 1.0, 0.01, 1};
  CHECK(af_step(field, &p) == AF_OK);
  CHECK(af_advance(field, &p, 0.5) == AF_OK);
  CHECK(af_field_mean(field, &m1) == AF_OK);
  CHECK(fabs(m1 - m0) <= 1e-13 * m0);

  double values[512];
  CHECK(af_field_values(field, values, 512) == AF_OK);
  CHECK(af_field_values(field, values, 10) == AF_ERR_INVALID_ARGUMENT);

  af_params bad = {0.05, -1.0, 0.01, 1};
  CHECK(af_step(field, &bad) == AF_ERR_INVALID_ARGUMENT);

  double k = 0.0, thr = 0.0, res = 1.0;
  af_params small = {0.01, 1.0, 0.01, 1};
  CHECK(af_kappa(&small, 0.0, 1.0, &k) == AF_OK);
  CHECK(fabs(k - 0.248026) < 5e-7);
  CHECK(af_peclet_threshold(&small, 0.0, 1.0, &thr) == AF_OK);
  CHECK(fabs(thr - 0.112540) < 1e-6);

  af_field* constant = NULL;
  CHECK(af_field_from_initial(grid, "{\"kind\": \"constant\", \"mass\": 24.8}", &constant) == AF_OK);
  CHECK(af_stationary_residual(constant, &p, &res) == AF_OK);
  CHECK(res <= 1e-13);

  af_field* inadmissible = NULL;
  CHECK(af_field_from_initial(grid, "{\"kind\": \"single_mode\", \"mass\": 1.0, \"amplitude\": 1.5, \"mode\": [1, 0, 0]}",
                              &inadmissible) == AF_ERR_ADMISSIBILITY);
  CHECK(af_field_from_initial(grid, "{\"kind\": \"nope\"}", &inadmissible) == AF_ERR_VALIDATION);

  captured[0] = '\0';
  CHECK(af_run_command("simulate", "/nonexistent/config.json", capture, capture, NULL) == 2);
  CHECK(strstr(captured, "\"error\":\"IoError\"") != NULL);

  af_field_destroy(constant);
  af_field_destroy(field);
  af_grid_destroy(grid);

  if (failures) {
    fprintf(stderr, "%d checks failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
