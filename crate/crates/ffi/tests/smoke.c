#include <stdio.h>
#include "amorphic.h"

int main(void) {
    AmAlgebra *a = NULL;
    bool amorphic = false;
    if (am_realize_affine(3, &a) != AM_STATUS_OK) {
        fprintf(stderr, "%s\n", am_last_error_message());
        return 1;
    }
    if (am_is_amorphic(a, &amorphic) != AM_STATUS_OK) {
        return 1;
    }
    if (am_construct("{", &a) != AM_STATUS_MALFORMED || am_last_error_message() == NULL) {
        return 1;
    }
    printf("dim %zu amorphic %d\n", am_algebra_dim(a), amorphic ? 1 : 0);
    am_algebra_free(a);
    return 0;
}
