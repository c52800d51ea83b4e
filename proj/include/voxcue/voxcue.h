#ifndef VOXCUE_H
#define VOXCUE_H

/* C interface to the voxcue speech-analytics core. Every function returns a
 * vc_status; on failure vc_last_error() holds a message for the calling
 * thread. Objects are opaque and released with their _free function. */

#include <stddef.h>
#include <stdint.h>

#if defined(VOXCUE_BUILDING_DLL)
#define VC_API __attribute__((visibility("default")))
#else
#define VC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vc_status {
  VC_OK = 0,
  VC_ERR_INVALID_ARGUMENT = 1,
  VC_ERR_IO = 2,
  VC_ERR_FORMAT = 3,
  VC_ERR_UNSUPPORTED_ENCODING = 4,
  VC_ERR_EMPTY_AUDIO = 5,
  VC_ERR_DUPLICATE_KEY = 6,
  VC_ERR_INSUFFICIENT_DATA = 7,
  VC_ERR_DEGENERATE = 8,
  VC_ERR_NOT_FOUND = 9,
  VC_ERR_INTERNAL = 10
} vc_status;

typedef enum vc_session { VC_S1 = 1, VC_S2 = 2, VC_S3 = 3 } vc_session;
typedef enum vc_rater { VC_RATER_P = 0, VC_RATER_SA = 1 } vc_rater;
typedef enum vc_test { VC_TEST_T = 0, VC_TEST_W = 1 } vc_test;

typedef struct vc_string vc_string;
typedef struct vc_config vc_config;
typedef struct vc_clip vc_clip;
typedef struct vc_feature_table vc_feature_table;
typedef struct vc_arrow_matrix vc_arrow_matrix;
typedef struct vc_rating_table vc_rating_table;
typedef struct vc_model vc_model;

VC_API const char* vc_version(void);
VC_API const char* vc_last_error(void);
VC_API const char* vc_status_name(vc_status status);

VC_API const char* vc_string_data(const vc_string* s);
VC_API size_t vc_string_size(const vc_string* s);
VC_API void vc_string_free(vc_string* s);

/* Features are indexed 0..29 in the fixed column order. */
VC_API size_t vc_feature_count(void);
VC_API const char* vc_feature_name(size_t index);

/* Configuration: defaults, "key = value" file, single-key overrides. */
VC_API vc_status vc_config_new(vc_config** out);
VC_API vc_status vc_config_load(const char* path, vc_config** out);
VC_API vc_status vc_config_set(vc_config* cfg, const char* key, const char* value);
VC_API vc_status vc_config_validate(const vc_config* cfg);
VC_API vc_status vc_config_to_text(const vc_config* cfg, vc_string** out);
VC_API vc_status vc_config_get_seed(const vc_config* cfg, uint64_t* out);
/* Copies up to cap levels; *n receives the total count. */
VC_API vc_status vc_config_alpha_levels(const vc_config* cfg, double* out, size_t cap, size_t* n);
VC_API void vc_config_free(vc_config* cfg);

/* Audio. rate <= 0 keeps the file's own rate. */
VC_API vc_status vc_clip_load(const char* path, double rate, vc_clip** out);
VC_API vc_status vc_clip_from_samples(const double* samples, size_t n, double rate, vc_clip** out);
VC_API vc_status vc_clip_info(const vc_clip* clip, double* rate, size_t* n_samples, double* duration);
VC_API void vc_clip_free(vc_clip* clip);

/* values/present must hold vc_feature_count() entries. cfg may be NULL. */
VC_API vc_status vc_extract_features(const vc_config* cfg, const vc_clip* clip, double* values, int* present);
/* Debug dumps: vowel/pause segments and per-window measures as CSV text. */
VC_API vc_status vc_segments_csv(const vc_config* cfg, const vc_clip* clip, vc_string** out);
VC_API vc_status vc_windows_csv(const vc_config* cfg, const vc_clip* clip, vc_string** out);

/* Feature tables. warnings (optional) receives newline-separated messages,
 * n_failed (optional) the number of unreadable entries. */
VC_API vc_status vc_extract_manifest(const vc_config* cfg, const char* manifest_path, vc_feature_table** out,
                                     vc_string** warnings, size_t* n_failed, size_t* n_entries);
VC_API vc_status vc_feature_table_new(vc_feature_table** out);
VC_API vc_status vc_feature_table_add(vc_feature_table* t, const char* speaker, vc_session session,
                                      const double* values, const int* present);
VC_API vc_status vc_feature_table_read(const char* path, vc_feature_table** out);
VC_API vc_status vc_feature_table_write(const vc_feature_table* t, const char* path);
VC_API vc_status vc_feature_table_to_csv(const vc_feature_table* t, vc_string** out);
VC_API size_t vc_feature_table_size(const vc_feature_table* t);
VC_API vc_status vc_feature_table_row(const vc_feature_table* t, size_t row, const char** speaker,
                                      vc_session* session, double* values, int* present);
VC_API void vc_feature_table_free(vc_feature_table* t);

/* Topic comparison: both tests, exact tiers and p-values where available. */
VC_API vc_status vc_compare_topics(const vc_feature_table* t, vc_arrow_matrix** out);
VC_API vc_status vc_arrow_matrix_read(const char* path, vc_arrow_matrix** out);
VC_API vc_status vc_arrow_matrix_write(const vc_arrow_matrix* m, const char* path);
VC_API vc_status vc_arrow_matrix_to_csv(const vc_arrow_matrix* m, vc_string** out);
VC_API void vc_arrow_matrix_free(vc_arrow_matrix* m);
/* out[0] = cos(1->2, 1->3), out[1] = cos(1->2, 2->3), out[2] = cos(1->3, 2->3). */
VC_API vc_status vc_transition_similarity(const vc_arrow_matrix* m, double alpha, vc_test test, double out[3]);

/* Paired tests on b - a. */
VC_API vc_status vc_paired_t(const double* a, const double* b, size_t n, double* statistic, double* p);
VC_API vc_status vc_wilcoxon(const double* a, const double* b, size_t n, double* w_plus, double* p);

/* Ratings and models. */
VC_API vc_status vc_ratings_read(const char* path, vc_rating_table** out);
VC_API void vc_ratings_free(vc_rating_table* r);

/* Stepwise fit plus leave-one-out stability on one session's rows. */
VC_API vc_status vc_train(const vc_config* cfg, const vc_feature_table* t, const vc_rating_table* r, const char* dv,
                          vc_session session, vc_rater rater, vc_model** out);
VC_API vc_status vc_model_read(const char* path, vc_model** out);
VC_API vc_status vc_model_write(const vc_model* m, const char* path);
VC_API vc_status vc_model_to_json(const vc_model* m, vc_string** out);
/* stable is -1 when the model carries no stability report. */
VC_API vc_status vc_model_summary(const vc_model* m, size_t* n_predictors, double* train_r, int* stable);
VC_API vc_status vc_model_predictor(const vc_model* m, size_t i, const char** name, double* beta,
                                    double* raw_coefficient);
VC_API vc_status vc_evaluate(const vc_model* m, const vc_feature_table* t, const vc_rating_table* r,
                             vc_session session, vc_rater rater, double* r_out, size_t* n_out);
VC_API void vc_model_free(vc_model* m);

/* Published reference models. */
VC_API size_t vc_registry_size(void);
VC_API vc_status vc_registry_json(vc_string** out);
/* z holds vc_feature_count() standardized values, present flags alongside. */
VC_API vc_status vc_reference_score(const char* dv, vc_session session, const double* z, const int* present,
                                    double* score, int* text_uncertain);
/* Scores every row; stats_path NULL uses the table's own mean/std. n_unscored
 * (optional) counts (row, model) pairs that could not be scored. */
VC_API vc_status vc_score_table(const vc_feature_table* t, const char* stats_path, vc_string** csv,
                                size_t* n_unscored);
VC_API vc_status vc_reference_stats_write(const vc_feature_table* t, const char* path);

/* Synthetic corpus under out_dir: wav/, manifest.csv, ratings.csv, latents.csv. */
VC_API vc_status vc_synth_corpus(const char* out_dir, size_t speakers, double session_seconds, uint64_t seed,
                                 double sample_rate);

#ifdef __cplusplus
}
#endif

#endif
