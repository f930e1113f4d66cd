#include <stdio.h>
#include <string.h>
#include "mhdlab.h"

#define CHECK(x)                                                     \
    do {                                                             \
        if (!(x)) {                                                  \
            fprintf(stderr, "check failed: %s (%s)\n", #x, mhd_last_error()); \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    double l[4];
    CHECK(mhd_lambda_pm(1.0, 2.0, l) == MHD_STATUS_OK);
    /* λ₊λ₋ = ξ₁² for real roots */
    CHECK(l[1] == 0.0 && l[3] == 0.0);
    CHECK((l[0] * l[2] - 1.0) < 1e-12 && (l[0] * l[2] - 1.0) > -1e-12);
    CHECK(mhd_lambda_pm(1.0, 2.0, NULL) == MHD_STATUS_NULL_POINTER);
    CHECK(strlen(mhd_last_error()) > 0);

    const char *json = "{\"grid\": {\"L1\": 20, \"N1\": 16, \"L2\": 16, \"N2\": 65, \"stretch\": 1},"
                       " \"init\": {\"radius\": 3, \"center\": [0, 5], \"amplitude\": 0.05}}";
    MhdConfig *cfg = NULL;
    CHECK(mhd_config_from_json(json, &cfg) == MHD_STATUS_OK);
    MhdSolver *s = NULL;
    CHECK(mhd_solver_new(cfg, &s) == MHD_STATUS_OK);
    double e0, e1, d1, t;
    CHECK(mhd_solver_stats(s, NULL, &e0, NULL) == MHD_STATUS_OK);
    CHECK(mhd_solver_advance_to(s, 0.5) == MHD_STATUS_OK);
    CHECK(mhd_solver_stats(s, &t, &e1, &d1) == MHD_STATUS_OK);
    CHECK(e1 < e0 && d1 > 0.0 && t > 0.49);
    double v;
    CHECK(mhd_solver_monitor(s, "u:L2", &v) == MHD_STATUS_OK && v > 0.0);
    CHECK(mhd_solver_monitor(s, "q:L2", &v) != MHD_STATUS_OK);
    mhd_solver_free(s);

    MhdConfig *bad = NULL;
    CHECK(mhd_config_from_json("{\"grid\": {\"N1\": 33}}", &bad) == MHD_STATUS_CONFIG);
    CHECK(bad == NULL && strstr(mhd_last_error(), "grid.N1") != NULL);
    mhd_config_free(cfg);
    printf("ok %s\n", mhd_version());
    return 0;
}
