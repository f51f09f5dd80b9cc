#include <stdio.h>
#include "ebloch.h"

int main(void) {
    EblochField *f = NULL;
    EblochField *q = NULL;
    EblochField *bad = NULL;
    uint32_t d, r1, r2;
    uint64_t m, w;
    if (ebloch_field_from_json("{\"poly\": [1, -2, 2, -1, 1]}", &f) != EblochStatus_Ok) {
        fprintf(stderr, "%s\n", ebloch_last_error());
        return 1;
    }
    if (ebloch_field_info(f, &d, &r1, &r2, &m) != EblochStatus_Ok) return 1;
    if (ebloch_field_from_json("{\"poly\": [0, 1]}", &q) != EblochStatus_Ok) return 1;
    if (ebloch_field_torsion_w(q, &w) != EblochStatus_Ok) return 1;
    if (ebloch_field_from_json("not json", &bad) != EblochStatus_InvalidInput || bad != NULL) return 1;
    printf("degree %u m %llu w %llu\n", d, (unsigned long long)m, (unsigned long long)w);
    ebloch_field_free(f);
    ebloch_field_free(q);
    return 0;
}
