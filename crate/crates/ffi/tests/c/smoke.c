#include <stdio.h>
#include <string.h>
#include "blocking_jacobi.h"

static int check(BjStatus s, const char *what) {
    if (s != BJ_STATUS_OK) {
        fprintf(stderr, "%s: %d %s\n", what, (int)s, bj_last_error());
        return 1;
    }
    return 0;
}

int main(void) {
    uint32_t omega[] = {3, 0, 1, 2, 2, 0, 1, 1, 0, 1, 0};
    BjOmega *w = NULL;
    BjGfp *g = NULL;
    char *text = NULL;
    if (check(bj_omega_new(2, 0, omega, 11, &w), "omega")) return 1;
    if (check(bj_psi(w, &g), "psi")) return 1;
    if (check(bj_gfp_to_string(g, &text), "string")) return 1;
    printf("%s\n", text);
    int bad = strcmp(text, "(3 1 1 0 ; 5 2 2 1)") != 0;
    bj_string_free(text);
    bj_gfp_free(g);
    bj_omega_free(w);

    BjReport *r = NULL;
    if (check(bj_verify("main", 8, 4, &r), "verify")) return 1;
    bad |= !bj_report_equal(r);
    bj_report_free(r);

    BjSeries *s = NULL;
    bad |= bj_series_s_even(4, NULL) != BJ_STATUS_NULL_POINTER;
    if (check(bj_series_s_even(4, &s), "s_even")) return 1;
    printf("terms %zu\n", bj_series_len(s));
    bj_series_free(s);
    return bad;
}
