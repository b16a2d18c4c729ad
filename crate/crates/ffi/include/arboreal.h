#ifndef ARBOREAL_H
#define ARBOREAL_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of a call.
 */
typedef enum ArbStatus {
  ARB_STATUS_OK = 0,
  /*
   Null pointer or malformed UTF-8.
   */
  ARB_STATUS_INVALID_ARGUMENT = 1,
  /*
   Input rejected by the library.
   */
  ARB_STATUS_VALIDATION = 2,
  /*
   The requested radius or depth is too small.
   */
  ARB_STATUS_HORIZON = 3,
  ARB_STATUS_BUDGET_EXCEEDED = 4,
  ARB_STATUS_PANIC = 5,
} ArbStatus;

/*
 A metric core over some group.
 */
typedef struct ArbCore ArbCore;

/*
 A group given by a presentation.
 */
typedef struct ArbGroup ArbGroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses a presentation file's text. On success `*out` holds a new group,
 released with [`arb_presentation_free`].

 # Safety
 `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum ArbStatus arb_presentation_parse(const char *text, struct ArbGroup **out);

/*
 # Safety
 `g` must come from [`arb_presentation_parse`] and not be used afterwards.
 */
void arb_presentation_free(struct ArbGroup *g);

/*
 Writes the normal form of `word` to `*out`.

 # Safety
 Pointers must be valid; `word` NUL-terminated.
 */
enum ArbStatus arb_normal_form(const struct ArbGroup *g, const char *word, char **out);

/*
 Four-point constant of the Cayley ball of the given radius, as a fraction.

 # Safety
 Pointers must be valid.
 */
enum ArbStatus arb_delta(const struct ArbGroup *g, size_t radius, int64_t *num, int64_t *den);

/*
 Rose of the comma-separated generators, subdivided into unit edges.

 # Safety
 Pointers must be valid; `gens` NUL-terminated.
 */
enum ArbStatus arb_core_from_generators(const struct ArbGroup *g,
                                        const char *gens,
                                        struct ArbCore **out);

/*
 Applies improvements until none is found within the horizon or
 `max_moves` have been made. `*out` receives a new core; `*moves`, if not
 null, the number of moves made.

 # Safety
 Pointers must be valid; `moves` may be null.
 */
enum ArbStatus arb_core_fold_to_minimal(const struct ArbGroup *g,
                                        const struct ArbCore *core,
                                        size_t depth,
                                        size_t radius,
                                        size_t max_moves,
                                        struct ArbCore **out,
                                        size_t *moves);

/*
 Total edge length; 0 for a null core.

 # Safety
 `core` must be null or valid.
 */
size_t arb_core_size(const struct ArbCore *core);

/*
 Smallest additive constant at multiplicative constant 1 over the cover
 ball of the given radius.

 # Safety
 Pointers must be valid.
 */
enum ArbStatus arb_core_measure_qi(const struct ArbGroup *g,
                                   const struct ArbCore *core,
                                   size_t radius,
                                   int64_t *c_num,
                                   int64_t *c_den);

/*
 # Safety
 Pointers must be valid.
 */
enum ArbStatus arb_core_to_json(const struct ArbGroup *g, const struct ArbCore *core, char **out);

/*
 # Safety
 `core` must come from this library and not be used afterwards.
 */
void arb_core_free(struct ArbCore *core);

/*
 Whether `word` lies in the subgroup generated by the comma-separated
 `gens`. Free groups only.

 # Safety
 Pointers must be valid; strings NUL-terminated.
 */
enum ArbStatus arb_stallings_member(const struct ArbGroup *g,
                                    const char *gens,
                                    const char *word,
                                    bool *out);

/*
 Message of the last failed call on this thread, or null. The pointer is
 valid until the next failing call on the same thread.
 */
const char *arb_last_error_message(void);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void arb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARBOREAL_H */
