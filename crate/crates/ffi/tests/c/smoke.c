#include <math.h>
#include <stdio.h>
#include "lagflow.h"

#define N 256

static int fail(const char *what, LfStatus s) {
    const char *msg = lf_last_error_message();
    fprintf(stderr, "%s: status %d: %s\n", what, (int)s, msg ? msg : "(none)");
    return 1;
}

int main(void) {
    double xy[2 * N];
    for (int k = 0; k < N; k++) {
        double s = 2.0 * M_PI * k / N;
        xy[2 * k] = 2.0 * cos(s);
        xy[2 * k + 1] = 2.0 * sin(s);
    }
    LfCurve *curve = NULL;
    LfStatus s = lf_curve_new(xy, N, true, &curve);
    if (s != LF_STATUS_OK) return fail("curve", s);

    double l, m, c;
    s = lf_curve_monotone(curve, &l, &m, &c);
    if (s != LF_STATUS_OK) return fail("monotone", s);

    LfFlow *flow = NULL;
    s = lf_flow_new(curve, false, &flow);
    if (s != LF_STATUS_OK) return fail("flow", s);
    LfSingularity r;
    s = lf_flow_evolve(flow, 2.0, &r);
    if (s != LF_STATUS_OK) return fail("evolve", s);

    s = lf_curve_new(NULL, 4, true, &curve);
    if (s != LF_STATUS_NULL_POINTER || lf_last_error_message() == NULL) return fail("null check", s);

    printf("%s %.6f %d %.6f\n", lf_version(), c, r.detected, r.t_estimate);
    lf_flow_free(flow);
    lf_curve_free(curve);
    return 0;
}
