#ifndef PDF_REMEDIATE_H
#define PDF_REMEDIATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum PrStatus {
  PR_STATUS_OK = 0,
  PR_STATUS_NULL_ARGUMENT = 1,
  PR_STATUS_INVALID_UTF8 = 2,
  PR_STATUS_MALFORMED_PDF = 3,
  PR_STATUS_INVALID_INPUT = 4,
  PR_STATUS_VALIDATION_FAILED = 5,
  PR_STATUS_STATE_ERROR = 6,
  PR_STATUS_IO = 7,
  PR_STATUS_PANIC = 8,
} PrStatus;

/**
 * A parsed PDF.
 */
typedef struct PrDocument PrDocument;

/**
 * Tagging decisions for one document.
 */
typedef struct PrTagmap PrTagmap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call on this thread; do not free.
 */
const char *pr_last_error(void);

/**
 * Parses `len` bytes of PDF into a new document handle.
 *
 * # Safety
 * `data` must point to `len` readable bytes; `out` must be writable.
 */
enum PrStatus pr_document_open(const uint8_t *data, size_t len, struct PrDocument **out);

/**
 * # Safety
 * `doc` must be NULL or a handle from [`pr_document_open`] not yet freed.
 */
void pr_document_free(struct PrDocument *doc);

/**
 * Number of pages, or 0 for a NULL handle.
 *
 * # Safety
 * `doc` must be NULL or a live document handle.
 */
size_t pr_document_page_count(const struct PrDocument *doc);

/**
 * Runs automatic tagging on `doc`.
 *
 * # Safety
 * `doc` must be a live document handle; `out` must be writable.
 */
enum PrStatus pr_autotag(const struct PrDocument *doc, struct PrTagmap **out);

/**
 * Loads a tagmap from JSON and checks it against `doc`.
 *
 * # Safety
 * `doc` must be a live document handle, `json` a C string, `out` writable.
 */
enum PrStatus pr_tagmap_from_json(const struct PrDocument *doc,
                                  const char *json,
                                  struct PrTagmap **out);

/**
 * # Safety
 * `map` must be NULL or a tagmap handle not yet freed.
 */
void pr_tagmap_free(struct PrTagmap *map);

/**
 * Serializes the tagmap; free the result with [`pr_string_free`].
 *
 * # Safety
 * `map` must be a live tagmap handle; `out` must be writable.
 */
enum PrStatus pr_tagmap_to_json(const struct PrTagmap *map, char **out);

/**
 * Applies one step action given as JSON, for example
 * `{"action":"set_heading_level","region":3,"level":2}`. The tagmap is
 * unchanged on failure.
 *
 * # Safety
 * `map` and `doc` must be live handles; `action_json` a C string.
 */
enum PrStatus pr_tagmap_apply(struct PrTagmap *map,
                              const struct PrDocument *doc,
                              const char *action_json);

/**
 * Writes the tagged PDF described by `map`. The buffer is released with
 * [`pr_bytes_free`] using the returned length.
 *
 * # Safety
 * `doc` and `map` must be live handles; `out_data` and `out_len` writable.
 */
enum PrStatus pr_export(const struct PrDocument *doc,
                        const struct PrTagmap *map,
                        uint8_t **out_data,
                        size_t *out_len);

/**
 * Scores the structure tree of `doc` against a ground-truth JSON document
 * and returns the report as JSON.
 *
 * # Safety
 * `doc` must be a live handle, `truth_json` a C string, `out` writable.
 */
enum PrStatus pr_score(const struct PrDocument *doc, const char *truth_json, char **out);

/**
 * Spoken form of a LaTeX formula.
 *
 * # Safety
 * `latex` must be a C string; `out` writable.
 */
enum PrStatus pr_mathspeak(const char *latex, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, freed once.
 */
void pr_string_free(char *s);

/**
 * # Safety
 * `data` must be NULL or a buffer from [`pr_export`] with its length.
 */
void pr_bytes_free(uint8_t *data, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PDF_REMEDIATE_H */
