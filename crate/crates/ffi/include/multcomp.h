/* C ABI for the multcomp library.
 *
 * Every fallible function returns an McStatus and writes results through
 * out-pointers. Handles are opaque; free each one exactly once with its
 * matching *_free function. mc_last_error retrieves the message of the
 * most recent error on the calling thread.
 *
 * Link against the multcomp_ffi cdylib or staticlib.
 */

#ifndef MULTCOMP_H
#define MULTCOMP_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum McStatus {
  MC_OK = 0,
  MC_NULL_POINTER = 1,
  MC_INVALID_ARGUMENT = 2,
  MC_OUT_OF_RANGE = 3,
  MC_RESOURCE_BUDGET = 4,
  MC_DOMAIN = 5,
  MC_INFEASIBLE = 6,
  MC_UNVERIFIED = 7,
  MC_PARSE = 8,
  MC_IO = 9,
  MC_INTERNAL = 10,
  MC_BUFFER_TOO_SMALL = 11,
} McStatus;

typedef struct McPrimeTable McPrimeTable;
typedef struct McFactorSieve McFactorSieve;
typedef struct McIntegerSet McIntegerSet;
typedef struct McPartition McPartition;
typedef struct McFamily McFamily;

/* Last error message (NUL-terminated) copied into buf; returns the full
 * length including the terminator. Pass cap = 0 to query the length. */
size_t mc_last_error(char *buf, size_t cap);

/* Library version; static storage, do not free. */
const char *mc_version(void);

/* --- prime tables ------------------------------------------------------ */

/* All primes <= limit. */
McStatus mc_prime_table_new(uint64_t limit, McPrimeTable **out);
void mc_prime_table_free(McPrimeTable *table);
McStatus mc_prime_table_len(const McPrimeTable *table, size_t *out);
/* pi(x): number of primes <= x. */
McStatus mc_prime_table_count(const McPrimeTable *table, uint64_t x,
                              uint64_t *out);
/* The prime of 0-based rank index. */
McStatus mc_prime_table_nth(const McPrimeTable *table, size_t index,
                            uint64_t *out);

/* --- factor sieves ------------------------------------------------------ */

/* Smallest-prime-factor table for [2, limit]. */
McStatus mc_factor_sieve_new(uint64_t limit, McFactorSieve **out);
void mc_factor_sieve_free(McFactorSieve *sieve);
/* Prime factorization of n (ascending, with multiplicity); 64 slots
 * always suffice. */
McStatus mc_factorize(const McFactorSieve *sieve, uint64_t n, uint64_t *buf,
                      size_t cap, size_t *written);

/* --- analytic constants -------------------------------------------------- */

McStatus mc_gamma(double t, double *out);
/* (h!)^(1/h) / gamma(1/h). */
McStatus mc_raikov_constant(uint32_t h, double *out);
/* 1 / gamma(1 + 1/h), h >= 2. */
McStatus mc_upper_constant(uint32_t h, double *out);

/* --- integer sets --------------------------------------------------------- */

/* Build a set from strictly increasing elements in [1, limit]. */
McStatus mc_integer_set_new(const uint64_t *elements, size_t len,
                            uint64_t limit, McIntegerSet **out);
/* The full interval [1, limit]. */
McStatus mc_integer_set_range(uint64_t limit, McIntegerSet **out);
void mc_integer_set_free(McIntegerSet *set);
McStatus mc_integer_set_len(const McIntegerSet *set, size_t *out);
/* Counting function A(x). */
McStatus mc_integer_set_counting(const McIntegerSet *set, uint64_t x,
                                 uint64_t *out);
/* A(x) (log x)^(1 - tau) / x. */
McStatus mc_integer_set_density_statistic(const McIntegerSet *set, double tau,
                                          uint64_t x, double *out);
/* Truncated Dirichlet sum over elements <= cutoff (s > 1). */
McStatus mc_dirichlet_partial(const McIntegerSet *set, double s,
                              uint64_t cutoff, double *out);

/* --- representation counting and verification ----------------------------- */

/* S_{A,h}(n): ordered h-tuples from the set with product n. */
McStatus mc_repr_count(const McIntegerSet *set, size_t h, uint64_t n,
                       const McFactorSieve *sieve, uint64_t *out);
/* S_{A_1,...,A_h}(n) over h distinct sets. */
McStatus mc_joint_repr_count(const McIntegerSet *const *sets, size_t h,
                             uint64_t n, const McFactorSieve *sieve,
                             uint64_t *out);
/* sum_{n <= x} S(n), one pass over tuples with product <= x. */
McStatus mc_summatory_repr(const McIntegerSet *const *sets, size_t h,
                           uint64_t x, uint64_t *out);
/* Least n <= x with no representation: *found tells whether one exists,
 * *counterexample holds it. */
McStatus mc_verify_complement(const McIntegerSet *const *sets, size_t h,
                              uint64_t x, const McFactorSieve *sieve,
                              bool *found, uint64_t *counterexample);

/* --- sign series ----------------------------------------------------------- */

/* Greedy sign assignment steering sum f(k) q_k to target; signs written
 * as +1/-1 bytes. Dominance is verified against tail_allowance. */
McStatus mc_sign_solve(const double *q, size_t len, double target,
                       double tail_allowance, int8_t *signs, double *achieved,
                       double *residual);

/* --- prime partitions ------------------------------------------------------ */

/* Partition of the primes <= cutoff with density targets tau (summing to
 * 1) and Mertens targets a (multiplying to 1), each of length h. */
McStatus mc_partition_build(const double *tau, const double *a, size_t h,
                            uint64_t cutoff, McPartition **out);
void mc_partition_free(McPartition *partition);
McStatus mc_partition_part_count(const McPartition *partition, size_t *out);
/* 1-based index of the part containing the prime. */
McStatus mc_partition_part_of(const McPartition *partition, uint64_t prime,
                              size_t *out);
/* Achieved count / density statistic / Mertens statistic of one part
 * (0-based index) at the cutoff. */
McStatus mc_partition_part_stats(const McPartition *partition, size_t index,
                                 uint64_t *count, double *density,
                                 double *mertens);
/* Serialize in the text artifact format. */
McStatus mc_partition_write(const McPartition *partition, const char *path);

/* --- complement families ---------------------------------------------------- */

/* Smooth-number family over a partition, exactly verified on [1, limit]. */
McStatus mc_smooth_family_build(const McPartition *partition,
                                const McFactorSieve *sieve, uint64_t limit,
                                McFamily **out);
/* Checkpointed family: n_override = 0 uses ceil(256/eps^2) + 1; growth 0
 * grows by x^3 + 1, growth 1 by x^3 (both capped at the table limit). */
McStatus mc_checkpoint_family_build(size_t h, double epsilon, size_t steps,
                                    uint64_t n_override, int32_t growth,
                                    const McPrimeTable *table,
                                    const McFactorSieve *sieve,
                                    McFamily **out);
void mc_family_free(McFamily *family);
McStatus mc_family_h(const McFamily *family, size_t *out);
McStatus mc_family_checkpoint_count(const McFamily *family, size_t *out);
McStatus mc_family_checkpoint(const McFamily *family, size_t index,
                              uint64_t *out);
McStatus mc_family_set_len(const McFamily *family, size_t index, size_t *out);
/* Copy the elements of one set; MC_BUFFER_TOO_SMALL reports the required
 * length in *written. */
McStatus mc_family_set_elements(const McFamily *family, size_t index,
                                uint64_t *buf, size_t cap, size_t *written);
/* Exact verification of the family on [1, x]. */
McStatus mc_family_verify(const McFamily *family, uint64_t x,
                          const McFactorSieve *sieve, bool *found,
                          uint64_t *counterexample);
/* Serialize in the text artifact format. */
McStatus mc_family_write(const McFamily *family, const char *path);

#ifdef __cplusplus
}
#endif

#endif /* MULTCOMP_H */
