#ifndef ELOSTEER_H
#define ELOSTEER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EsStatus {
  ES_STATUS_OK = 0,
  ES_STATUS_NULL_POINTER = 1,
  ES_STATUS_INVALID_ARGUMENT = 2,
  ES_STATUS_INVALID_UTF8 = 3,
  ES_STATUS_INVALID_JSON = 4,
  ES_STATUS_FLOW_VIOLATION = 5,
  ES_STATUS_FORBIDDEN_CONTROL = 6,
  ES_STATUS_NOT_FOUND = 7,
  ES_STATUS_REJECTED = 8,
  ES_STATUS_PANIC = 9,
} EsStatus;

typedef enum EsModel {
  ES_MODEL_CHESS = 0,
  ES_MODEL_LOGISTIC = 1,
} EsModel;

/**
 * Opaque study handle.
 */
typedef struct EsStudy EsStudy;

typedef struct EsRatingUpdate {
  double learner;
  double exercise;
  double delta;
  double expected;
} EsRatingUpdate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library on the same thread.
 */
const char *es_last_error_message(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void es_string_free(char *s);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum EsStatus es_expected_probability(double learner,
                                      double exercise,
                                      enum EsModel model,
                                      double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum EsStatus es_update_ratings(double learner,
                                double exercise,
                                bool correct,
                                double k,
                                enum EsModel model,
                                struct EsRatingUpdate *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum EsStatus es_target_rating_gap(double target_p, enum EsModel model, double *out);

/**
 * Multiplicative factor of a steering step in -10..=10.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum EsStatus es_steering_factor(int32_t step, double *out);

/**
 * Label of the level band containing `rating`; a static string.
 */
const char *es_dreyfus_label(double rating);

/**
 * Creates a study. `config_json` may be NULL for the defaults.
 *
 * # Safety
 * `config_json` must be NULL or a nul-terminated string; `out` valid for writes.
 */
enum EsStatus es_study_new(const char *config_json, struct EsStudy **out);

/**
 * # Safety
 * `h` must be NULL or a handle from [`es_study_new`] not yet freed.
 */
void es_study_free(struct EsStudy *h);

/**
 * Adds exercises given as a JSON array of catalog entries.
 *
 * # Safety
 * `h` must be a live handle, `entries_json` nul-terminated, `out_count` valid for writes.
 */
enum EsStatus es_study_ingest_catalog(struct EsStudy *h,
                                      const char *entries_json,
                                      size_t *out_count);

/**
 * Registers a learner; writes `{"id": ..., "group": ...}`.
 *
 * # Safety
 * `h` must be a live handle and `out_json` valid for writes.
 */
enum EsStatus es_study_register(struct EsStudy *h, char **out_json);

/**
 * # Safety
 * `h` must be a live handle, `learner` nul-terminated, `out_rating` valid for writes.
 */
enum EsStatus es_study_initialize_mastery(struct EsStudy *h,
                                          const char *learner,
                                          double slider_position,
                                          double *out_rating);

/**
 * # Safety
 * `h` must be a live handle and `learner` nul-terminated.
 */
enum EsStatus es_study_acknowledge_explanation(struct EsStudy *h, const char *learner);

/**
 * Composes the next series; `topic` may be NULL to reuse the last topic.
 * Writes the recommendation as JSON.
 *
 * # Safety
 * `h` must be a live handle, strings nul-terminated, `out_json` valid for writes.
 */
enum EsStatus es_study_start_series(struct EsStudy *h,
                                    const char *learner,
                                    const char *topic,
                                    char **out_json);

/**
 * Records an answer; writes the attempt record as JSON.
 *
 * # Safety
 * `h` must be a live handle, strings nul-terminated, `out_json` valid for writes.
 */
enum EsStatus es_study_attempt(struct EsStudy *h,
                               const char *learner,
                               const char *exercise_id,
                               size_t answer_index,
                               char **out_json);

/**
 * # Safety
 * `h` must be a live handle, `learner` nul-terminated, `out_rating` valid for writes.
 */
enum EsStatus es_study_steer(struct EsStudy *h,
                             const char *learner,
                             int32_t step,
                             double *out_rating);

/**
 * # Safety
 * `h` must be a live handle and `learner` nul-terminated.
 */
enum EsStatus es_study_acknowledge_impact(struct EsStudy *h, const char *learner);

/**
 * Submits `{"answers": {"Q1": 4, ...}, "free_text": {"trust": "..."}}`.
 *
 * # Safety
 * `h` must be a live handle and strings nul-terminated.
 */
enum EsStatus es_study_submit_questionnaire(struct EsStudy *h,
                                            const char *learner,
                                            const char *response_json);

/**
 * Writes `{"id", "group", "state", "rating"}` for a learner.
 *
 * # Safety
 * `h` must be a live handle, `learner` nul-terminated, `out_json` valid for writes.
 */
enum EsStatus es_study_learner(struct EsStudy *h, const char *learner, char **out_json);

/**
 * Writes the learner's mastery history as a JSON array.
 *
 * # Safety
 * `h` must be a live handle, `learner` nul-terminated, `out_json` valid for writes.
 */
enum EsStatus es_study_history(struct EsStudy *h, const char *learner, char **out_json);

/**
 * Writes the event log as JSON lines.
 *
 * # Safety
 * `h` must be a live handle and `out_jsonl` valid for writes.
 */
enum EsStatus es_study_log_jsonl(struct EsStudy *h, char **out_jsonl);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELOSTEER_H */
