/* Generated by cbindgen; do not edit. */

#ifndef ELLIPTIC_AINF_H
#define ELLIPTIC_AINF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EaBasisElement {
  EA_BASIS_ELEMENT_ID_O = 0,
  EA_BASIS_ELEMENT_ID_L = 1,
  EA_BASIS_ELEMENT_THETA = 2,
  EA_BASIS_ELEMENT_ETA = 3,
  EA_BASIS_ELEMENT_XI = 4,
  EA_BASIS_ELEMENT_XI_L = 5,
} EaBasisElement;

typedef enum EaMethod {
  EA_METHOD_RAPID = 0,
  EA_METHOD_CLASSICAL = 1,
  EA_METHOD_Q_SERIES = 2,
} EaMethod;

/**
 * Result codes.
 */
typedef enum EaStatus {
  EA_STATUS_OK = 0,
  EA_STATUS_NULL_POINTER = 1,
  EA_STATUS_INVALID_ARGUMENT = 2,
  EA_STATUS_NON_ORIENTED_BASIS = 3,
  EA_STATUS_NON_COMPOSABLE = 4,
  EA_STATUS_BUDGET_EXCEEDED = 5,
  EA_STATUS_OUT_OF_RANGE = 6,
  EA_STATUS_PANIC = 7,
} EaStatus;

/**
 * Opaque lattice handle carrying its summation settings.
 */
typedef struct EaLattice EaLattice;

/**
 * Opaque product table handle.
 */
typedef struct EaTable EaTable;

/**
 * A complex value together with a bound on the truncated tail of its series.
 */
typedef struct EaValue {
  double re;
  double im;
  double tail_bound;
} EaValue;

/**
 * One product `m_n(inputs) = coefficient * output`; `is_zero` marks the vanishing ones.
 */
typedef struct EaProduct {
  bool is_zero;
  enum EaBasisElement output;
  struct EaValue coefficient;
} EaProduct;

typedef struct EaTableEntry {
  uint32_t arity;
  enum EaBasisElement output;
  struct EaValue coefficient;
} EaTableEntry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates the lattice `Z omega1 + Z omega2`; the basis must be oriented.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum EaStatus ea_lattice_new(double omega1_re,
                             double omega1_im,
                             double omega2_re,
                             double omega2_im,
                             struct EaLattice **out);

/**
 * Creates the lattice `Z + Z tau`, `Im tau > 0`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum EaStatus ea_lattice_from_tau(double tau_re, double tau_im, struct EaLattice **out);

/**
 * Sets the bound demanded of every truncated tail (default `1e-15`).
 *
 * # Safety
 * `lattice` must be a live handle or null.
 */
enum EaStatus ea_lattice_set_tolerance(struct EaLattice *lattice, double epsilon);

/**
 * # Safety
 * `lattice` must be a live handle or null, and must not be used afterwards.
 */
void ea_lattice_free(struct EaLattice *lattice);

/**
 * `tau = omega2 / omega1`.
 *
 * # Safety
 * `lattice` must be a live handle; `re` and `im` must be valid for writes.
 */
enum EaStatus ea_lattice_tau(const struct EaLattice *lattice, double *re, double *im);

/**
 * `e*_n` of the lattice by the chosen route; `n` even, at least 2.
 *
 * # Safety
 * `lattice` must be a live handle; `out` must be valid for a write.
 */
enum EaStatus ea_eisenstein(const struct EaLattice *lattice,
                            uint32_t n,
                            enum EaMethod method,
                            struct EaValue *out);

/**
 * `g_{a,b}` of the lattice.
 *
 * # Safety
 * `lattice` must be a live handle; `out` must be valid for a write.
 */
enum EaStatus ea_g(const struct EaLattice *lattice, uint32_t a, uint32_t b, struct EaValue *out);

/**
 * The structure constant `M(a,b,c,d)` of the lattice's normalization.
 *
 * # Safety
 * `lattice` must be a live handle; `out` must be valid for a write.
 */
enum EaStatus ea_m_direct(const struct EaLattice *lattice,
                          uint32_t a,
                          uint32_t b,
                          uint32_t c,
                          uint32_t d,
                          struct EaValue *out);

/**
 * The product of a composable string of `len` basis elements.
 *
 * # Safety
 * `lattice` must be a live handle, `inputs` must point to `len` elements, and `out` must be
 * valid for a write.
 */
enum EaStatus ea_product(const struct EaLattice *lattice,
                         const enum EaBasisElement *inputs,
                         size_t len,
                         struct EaProduct *out);

/**
 * Builds the table of all nonzero products of arity `2..=n_max`.
 *
 * # Safety
 * `lattice` must be a live handle; `out` must be valid for a pointer write.
 */
enum EaStatus ea_table_new(const struct EaLattice *lattice, uint32_t n_max, struct EaTable **out);

/**
 * Number of entries; 0 for a null handle.
 *
 * # Safety
 * `table` must be a live handle or null.
 */
size_t ea_table_len(const struct EaTable *table);

/**
 * Arity, output and coefficient of entry `index`.
 *
 * # Safety
 * `table` must be a live handle; `out` must be valid for a write.
 */
enum EaStatus ea_table_entry(const struct EaTable *table, size_t index, struct EaTableEntry *out);

/**
 * Copies the inputs of entry `index` into `buf` (capacity `cap`) and stores their number in
 * `len`. With a too small buffer only `len` is written and `OutOfRange` is returned.
 *
 * # Safety
 * `table` must be a live handle, `buf` valid for `cap` writes (or null with `cap == 0`), and
 * `len` valid for a write.
 */
enum EaStatus ea_table_entry_inputs(const struct EaTable *table,
                                    size_t index,
                                    enum EaBasisElement *buf,
                                    size_t cap,
                                    size_t *len);

/**
 * # Safety
 * `table` must be a live handle or null, and must not be used afterwards.
 */
void ea_table_free(struct EaTable *table);

/**
 * Message of the last failed call on this thread, empty after a successful one. The pointer
 * stays valid until the next call on the same thread.
 */
const char *ea_last_error_message(void);

/**
 * Static name of a status code.
 */
const char *ea_status_name(enum EaStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELLIPTIC_AINF_H */
