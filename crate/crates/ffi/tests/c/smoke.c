#include <math.h>
#include <stdio.h>
#include "elliptic_ainf.h"

int main(void) {
    EaLattice *lat = NULL;
    if (ea_lattice_from_tau(0.0, 1.0, &lat) != EA_STATUS_OK) return 1;
    EaValue v;
    if (ea_eisenstein(lat, 4, EA_METHOD_RAPID, &v) != EA_STATUS_OK) return 2;
    if (fabs(v.re - 3.1512120021538976) > 1e-12 || fabs(v.im) > 1e-12) return 3;

    EaTable *table = NULL;
    if (ea_table_new(lat, 4, &table) != EA_STATUS_OK) return 4;
    size_t n = ea_table_len(table);
    EaBasisElement buf[8];
    size_t len = 0;
    EaTableEntry e;
    if (ea_table_entry(table, n - 1, &e) != EA_STATUS_OK || e.arity != 4) return 5;
    if (ea_table_entry_inputs(table, n - 1, buf, 8, &len) != EA_STATUS_OK || len != 4) return 6;
    if (ea_table_entry(table, n, &e) != EA_STATUS_OUT_OF_RANGE) return 7;
    if (ea_last_error_message()[0] == '\0') return 8;

    EaLattice *bad = NULL;
    if (ea_lattice_new(0.0, 1.0, 1.0, 0.0, &bad) != EA_STATUS_NON_ORIENTED_BASIS || bad) return 9;

    printf("%zu entries, e*_4(i) = %.15f\n", n, v.re);
    ea_table_free(table);
    ea_lattice_free(lat);
    return 0;
}
