/* Runs a frozen axis scenario with zero swirl, so f = cos t, and prints the
 * collapse time and the last sampled stretch. */
#include <stdio.h>
#include <stdlib.h>

#include "blowuplab.h"

static const char *SCENARIO =
    "{\"location\":\"axis\",\"parity\":\"even_swirl\",\"swirl\":{\"b0\":0.0},"
    "\"a0\":0.0,\"c0z\":0.0,\"pressure_rr\":{\"kind\":{\"type\":\"constant\",\"value\":1.0}},"
    "\"pressure_zz\":\"constraint\",\"t_end\":3.0}";

static int check(BlStatus s, const char *what) {
    if (s != BL_STATUS_OK) {
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, bl_last_error());
        return 1;
    }
    return 0;
}

int main(void) {
    BlScenario *scn = NULL;
    BlSolution *sol = NULL;
    if (check(bl_scenario_from_json(SCENARIO, &scn), "parse")) return 1;
    if (check(bl_run(scn, &sol), "run")) return 1;

    double t = 0.0;
    int found = 0;
    if (check(bl_solution_collapse_time(sol, &t, &found), "collapse")) return 1;

    size_t n = 0;
    bl_solution_copy_series(sol, BL_SERIES_F, NULL, 0, &n);
    double *f = malloc(n * sizeof(double));
    if (check(bl_solution_copy_series(sol, BL_SERIES_F, f, n, &n), "series")) return 1;

    BlRunStatus st;
    bl_solution_status(sol, &st);
    printf("version %s\n", bl_version());
    printf("status %d steps %zu\n", (int)st, n);
    printf("collapse %d %.9f\n", found, t);
    printf("last_f %.3e\n", f[n - 1]);

    free(f);
    bl_solution_free(sol);
    bl_scenario_free(scn);
    return 0;
}
