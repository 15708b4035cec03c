#include <math.h>
#include <stdio.h>
#include <string.h>

#include "rminmax.h"

static const char *CONFIG =
    "{\"version\": 1,"
    " \"problem\": {\"kind\": \"quadratic_saddle\", \"a\": [[2, 0], [0, 1]], \"mu\": 1.0},"
    " \"solver\": {\"algorithm\": \"rgda\", \"gamma\": 0.01, \"lambda\": 0.1,"
    "            \"eta\": {\"constant\": {\"value\": 1.0}}, \"iterations\": 200, \"seed\": 3}}";

#define CHECK(cond)                                                         \
    do {                                                                    \
        if (!(cond)) {                                                      \
            fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, rmm_last_error()); \
            return 1;                                                       \
        }                                                                   \
    } while (0)

int main(void) {
    RmmExperiment *exp = NULL;
    RmmRun *run = NULL;
    size_t rows = 0, cols = 0, n = 0;
    double avg = 0.0, f[200];

    CHECK(strlen(rmm_version()) > 0);
    CHECK(rmm_experiment_from_json("{", &exp) == RMM_STATUS_CONFIG_ERROR);
    CHECK(exp == NULL);
    CHECK(strlen(rmm_last_error()) > 0);

    CHECK(rmm_experiment_from_json(CONFIG, &exp) == RMM_STATUS_OK);
    CHECK(rmm_experiment_x_shape(exp, &rows, &cols) == RMM_STATUS_OK);
    CHECK(rows == 2 && cols == 1);
    CHECK(rmm_experiment_run(exp, UINT64_MAX, &run) == RMM_STATUS_OK);
    CHECK(rmm_run_iterations(run) == 200);
    CHECK(rmm_run_averaged_stationarity(run, &avg) == RMM_STATUS_OK);
    CHECK(avg > 0.0 && isfinite(avg));
    CHECK(rmm_run_trace_column(run, "f", f, 10, &n) == RMM_STATUS_BUFFER_TOO_SMALL);
    CHECK(n == 200);
    CHECK(rmm_run_trace_column(run, "f", f, 200, &n) == RMM_STATUS_OK);
    CHECK(isfinite(f[199]));

    char *summary = rmm_run_summary_json(run);
    CHECK(summary != NULL && strstr(summary, "\"algorithm\":\"rgda\"") != NULL);
    rmm_string_free(summary);

    rmm_run_free(run);
    rmm_experiment_free(exp);
    printf("ok\n");
    return 0;
}
