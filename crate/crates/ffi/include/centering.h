#ifndef CENTERING_H
#define CENTERING_H

#include <stddef.h>

/**
 * Result of every fallible call.
 */
typedef enum CenteringStatus {
  CENTERING_STATUS_OK = 0,
  CENTERING_STATUS_NULL_ARGUMENT = 1,
  CENTERING_STATUS_INVALID_UTF8 = 2,
  CENTERING_STATUS_LOAD_FAILED = 3,
  CENTERING_STATUS_ENGINE_FAILED = 4,
  CENTERING_STATUS_INVALID_ARGUMENT = 5,
  CENTERING_STATUS_PANICKED = 6,
} CenteringStatus;

typedef enum CenteringTrace {
  CENTERING_TRACE_OFF = 0,
  CENTERING_TRACE_SUMMARY = 1,
  CENTERING_TRACE_FULL = 2,
} CenteringTrace;

typedef enum CenteringArtifact {
  CENTERING_ARTIFACT_CENTERING = 0,
  CENTERING_ARTIFACT_RESOLUTION = 1,
  CENTERING_ARTIFACT_TRACE = 2,
  CENTERING_ARTIFACT_AMBIGUITY = 3,
  /**
   * The whole report as one JSON object.
   */
  CENTERING_ARTIFACT_JSON = 4,
} CenteringArtifact;

/**
 * A loaded document with its knowledge base.
 */
typedef struct CenteringDocument CenteringDocument;

/**
 * The result of running a document.
 */
typedef struct CenteringRun CenteringRun;

/**
 * Pronoun counts of a run.
 */
typedef struct CenteringAmbiguity {
  size_t pronouns;
  size_t local;
  size_t global;
  size_t unambiguous;
} CenteringAmbiguity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *centering_last_error(void);

/**
 * Loads a document. `taxonomy` and `categories` may be NULL to use the
 * document's own directives.
 *
 * # Safety
 * String arguments must be NULL or NUL-terminated; `out` must be writable.
 */
enum CenteringStatus centering_document_load(const char *path,
                                             const char *taxonomy,
                                             const char *categories,
                                             struct CenteringDocument **out);

/**
 * # Safety
 * `doc` must be NULL or a handle from `centering_document_load` not yet freed.
 */
void centering_document_free(struct CenteringDocument *doc);

/**
 * Runs the first `sentences` sentences of `doc` (0 means all). `trace` is
 * a `CenteringTrace` value.
 *
 * # Safety
 * `doc` must be a live document handle; `out` must be writable.
 */
enum CenteringStatus centering_run(const struct CenteringDocument *doc,
                                   size_t max_readings,
                                   int trace,
                                   size_t sentences,
                                   struct CenteringRun **out);

/**
 * # Safety
 * `run` must be NULL or a handle from `centering_run` not yet freed.
 */
void centering_run_free(struct CenteringRun *run);

/**
 * Number of centering rows (one per reading per utterance); 0 for NULL.
 *
 * # Safety
 * `run` must be NULL or a live run handle.
 */
size_t centering_run_row_count(const struct CenteringRun *run);

/**
 * # Safety
 * `run` must be a live run handle; `out` must be writable.
 */
enum CenteringStatus centering_run_ambiguity(const struct CenteringRun *run,
                                             struct CenteringAmbiguity *out);

/**
 * Renders one `CenteringArtifact` as a new string, to be released with
 * `centering_string_free`.
 *
 * # Safety
 * `run` must be a live run handle; `out` must be writable.
 */
enum CenteringStatus centering_run_artifact(const struct CenteringRun *run,
                                            int artifact,
                                            char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void centering_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CENTERING_H */
