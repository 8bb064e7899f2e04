#include <math.h>
#include <stdio.h>
#include "vwwave.h"

static int failures = 0;

#define EXPECT(cond, msg)                          \
    do {                                           \
        if (!(cond)) {                             \
            fprintf(stderr, "FAIL: %s\n", msg);    \
            failures++;                            \
        }                                          \
    } while (0)

int main(void) {
    double c = vww_mollifier_constant();
    EXPECT(c > 2.2518 && c < 2.2528, "mollifier constant");

    VwwProfile *profile = NULL;
    EXPECT(vww_profile_builtin(1, 1.0, &profile) == VWW_STATUS_OK, "builtin profile");

    VwwDepth *depth = NULL;
    EXPECT(vww_regularize(profile, 0.2, &depth) == VWW_STATUS_OK, "regularize");
    double xs[3] = {50.0, 75.0, 90.0};
    double hs[3] = {0.0, 0.0, 0.0};
    EXPECT(vww_depth_sample(depth, xs, 3, hs) == VWW_STATUS_OK, "sample");
    EXPECT(fabs(hs[0] - 100.0) < 1e-10, "h(50)");
    EXPECT(fabs(hs[1] - 55.0) < 1e-9, "h(75)");
    EXPECT(fabs(hs[2] - 10.0) < 1e-10, "h(90)");

    VwwDepth *bad = NULL;
    EXPECT(vww_regularize(profile, 0.0, &bad) == VWW_STATUS_INVALID_PARAMETER, "eps = 0 rejected");
    EXPECT(vww_last_error() != NULL, "error message set");

    double lower[3] = {0.0, -1.0, -1.0};
    double diag[3] = {2.0, 2.0, 2.0};
    double upper[3] = {-1.0, -1.0, 0.0};
    double rhs[3] = {1.0, 1.0, 1.0};
    double x[3];
    EXPECT(vww_cyclic_reduction_solve(lower, diag, upper, rhs, 3, x) == VWW_STATUS_OK, "cr solve");
    EXPECT(fabs(x[0] - 1.5) < 1e-12 && fabs(x[1] - 2.0) < 1e-12 && fabs(x[2] - 1.5) < 1e-12, "cr values");

    VwwRun1D *run = NULL;
    EXPECT(vww_run_1d(profile, 0.2, 0.05, 0.05, 1.0, &run) == VWW_STATUS_OK, "run");
    EXPECT(vww_run_1d_node_count(run) == 2001, "node count");
    double drift = 1.0;
    EXPECT(vww_run_1d_energy_drift(run, &drift) == VWW_STATUS_OK && drift < 1e-8, "energy drift");

    vww_run_1d_free(run);
    vww_depth_free(depth);
    vww_profile_free(profile);
    if (failures == 0) {
        printf("ok\n");
    }
    return failures == 0 ? 0 : 1;
}
