#include <stdio.h>
#include <math.h>
#include "hls_lab.h"

int main(void) {
    HlsParams *params = NULL;
    if (hls_params_new(3, 1.0, &params) != HLS_STATUS_OK) return 1;

    HlsConstants consts;
    if (hls_constants(params, &consts) != HLS_STATUS_OK) return 2;
    if (fabs(consts.s_sharp - 5.4784) > 5e-3) return 3;

    double lambda0 = 0.0;
    if (hls_funk_hecke_multiplier(params, 0, &lambda0) != HLS_STATUS_OK) return 4;
    if (fabs(lambda0 - 4.0 / 3.0) > 1e-13) return 5;

    HlsGrid *grid = NULL;
    if (hls_grid_new(params, 16, 48, &grid) != HLS_STATUS_OK) return 6;

    HlsField *bubble = NULL;
    if (hls_field_bubble(grid, consts.c_crit, 0.3, 0, &bubble) != HLS_STATUS_OK) return 7;

    double residual = 1.0;
    if (hls_residual_norm(bubble, &residual) != HLS_STATUS_OK) return 8;
    if (residual > 1e-7) return 9;

    HlsProjection projection;
    if (hls_nearest_bubble(bubble, 1, &projection) != HLS_STATUS_OK) return 10;
    if (fabs(projection.zeta - 0.3) > 1e-5) return 11;

    /* error paths */
    if (hls_params_new(3, 2.0, &params) != HLS_STATUS_DOMAIN) return 12;
    if (hls_grid_new(params, 16, 10, &grid) != HLS_STATUS_CONFIG) return 13;

    hls_field_free(bubble);
    hls_grid_free(grid);
    hls_params_free(params);
    printf("C ABI smoke test passed: S = %.6f, lambda_0 = %.6f\n", consts.s_sharp, lambda0);
    return 0;
}
