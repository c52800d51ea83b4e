#include "voxcue/voxcue.h"

#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "voxcue/audio.hpp"
#include "voxcue/config.hpp"
#include "voxcue/error.hpp"
#include "voxcue/features.hpp"
#include "voxcue/models.hpp"
#include "voxcue/pipeline.hpp"
#include "voxcue/regression.hpp"
#include "voxcue/stats.hpp"
#include "voxcue/synth.hpp"

struct vc_string {
  std::string text;
};
struct vc_config {
  voxcue::RunConfig cfg;
};
struct vc_clip {
  voxcue::AudioClip clip;
};
struct vc_feature_table {
  voxcue::FeatureTable table;
};
struct vc_arrow_matrix {
  voxcue::SignificanceMatrix matrix;
};
struct vc_rating_table {
  voxcue::RatingTable ratings;
};
struct vc_model {
  voxcue::RegressionModel model;
};

namespace {

thread_local std::string g_last_error;

vc_status status_of(voxcue::ErrorCode c) {
  using voxcue::ErrorCode;
  switch (c) {
    case ErrorCode::InvalidArgument: return VC_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return VC_ERR_IO;
    case ErrorCode::Format: return VC_ERR_FORMAT;
    case ErrorCode::UnsupportedEncoding: return VC_ERR_UNSUPPORTED_ENCODING;
    case ErrorCode::EmptyAudio: return VC_ERR_EMPTY_AUDIO;
    case ErrorCode::DuplicateKey: return VC_ERR_DUPLICATE_KEY;
    case ErrorCode::InsufficientData: return VC_ERR_INSUFFICIENT_DATA;
    case ErrorCode::Degenerate: return VC_ERR_DEGENERATE;
    case ErrorCode::NotFound: return VC_ERR_NOT_FOUND;
  }
  return VC_ERR_INTERNAL;
}

template <class F>
vc_status guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return VC_OK;
  } catch (const voxcue::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return VC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return VC_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw voxcue::Error(voxcue::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

const voxcue::RunConfig& config_or_default(const vc_config* cfg) {
  static const voxcue::RunConfig defaults;
  return cfg ? cfg->cfg : defaults;
}

voxcue::Session session_of(vc_session s) {
  if (s < VC_S1 || s > VC_S3) throw voxcue::Error(voxcue::ErrorCode::InvalidArgument, "session must be 1, 2 or 3");
  return static_cast<voxcue::Session>(s);
}

voxcue::RaterType rater_of(vc_rater r) {
  if (r != VC_RATER_P && r != VC_RATER_SA) throw voxcue::Error(voxcue::ErrorCode::InvalidArgument, "unknown rater type");
  return r == VC_RATER_P ? voxcue::RaterType::P : voxcue::RaterType::SA;
}

void emit(vc_string** out, std::string text) {
  require(out, "output");
  *out = new vc_string{std::move(text)};
}

void unpack(const voxcue::FeatureVector& fv, double* values, int* present) {
  for (std::size_t i = 0; i < voxcue::kFeatureCount; ++i) {
    if (values) values[i] = fv.at(i).value_or(0.0);
    if (present) present[i] = fv.at(i).has_value();
  }
}

voxcue::FeatureVector pack(const double* values, const int* present) {
  require(values, "values");
  voxcue::FeatureVector fv;
  for (std::size_t i = 0; i < voxcue::kFeatureCount; ++i)
    if (!present || present[i]) fv.at(i) = values[i];
  return fv;
}

voxcue::AudioClip canonical(const vc_config* cfg, const vc_clip* clip) {
  require(clip, "clip");
  const double rate = config_or_default(cfg).sample_rate;
  return clip->clip.sample_rate() == rate ? clip->clip : voxcue::resample(clip->clip, rate);
}

}  // namespace

extern "C" {

const char* vc_version(void) { return "0.1.0"; }
const char* vc_last_error(void) { return g_last_error.c_str(); }

const char* vc_status_name(vc_status s) {
  switch (s) {
    case VC_OK: return "ok";
    case VC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VC_ERR_IO: return "i/o error";
    case VC_ERR_FORMAT: return "format error";
    case VC_ERR_UNSUPPORTED_ENCODING: return "unsupported encoding";
    case VC_ERR_EMPTY_AUDIO: return "empty audio";
    case VC_ERR_DUPLICATE_KEY: return "duplicate key";
    case VC_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case VC_ERR_DEGENERATE: return "degenerate input";
    case VC_ERR_NOT_FOUND: return "not found";
    case VC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* vc_string_data(const vc_string* s) { return s ? s->text.c_str() : ""; }
size_t vc_string_size(const vc_string* s) { return s ? s->text.size() : 0; }
void vc_string_free(vc_string* s) { delete s; }

size_t vc_feature_count(void) { return voxcue::kFeatureCount; }
const char* vc_feature_name(size_t i) {
  return i < voxcue::kFeatureCount ? voxcue::feature_names()[i].data() : nullptr;
}

vc_status vc_config_new(vc_config** out) {
  return guard([&] {
    require(out, "output");
    *out = new vc_config{};
  });
}

vc_status vc_config_load(const char* path, vc_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "output");
    *out = new vc_config{voxcue::load_config(path)};
  });
}

vc_status vc_config_set(vc_config* cfg, const char* key, const char* value) {
  return guard([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    cfg->cfg.set(key, value);
  });
}

vc_status vc_config_validate(const vc_config* cfg) {
  return guard([&] {
    require(cfg, "config");
    cfg->cfg.validate();
  });
}

vc_status vc_config_to_text(const vc_config* cfg, vc_string** out) {
  return guard([&] { emit(out, config_or_default(cfg).to_text()); });
}

vc_status vc_config_get_seed(const vc_config* cfg, uint64_t* out) {
  return guard([&] {
    require(out, "output");
    *out = config_or_default(cfg).seed;
  });
}

vc_status vc_config_alpha_levels(const vc_config* cfg, double* out, size_t cap, size_t* n) {
  return guard([&] {
    const auto& levels = config_or_default(cfg).alpha_levels;
    if (cap) require(out, "output");
    for (size_t i = 0; i < levels.size() && i < cap; ++i) out[i] = levels[i];
    if (n) *n = levels.size();
  });
}

void vc_config_free(vc_config* cfg) { delete cfg; }

vc_status vc_clip_load(const char* path, double rate, vc_clip** out) {
  return guard([&] {
    require(path, "path");
    require(out, "output");
    *out = new vc_clip{rate > 0 ? voxcue::load_canonical(path, rate) : voxcue::load_wav(path)};
  });
}

vc_status vc_clip_from_samples(const double* samples, size_t n, double rate, vc_clip** out) {
  return guard([&] {
    require(out, "output");
    if (n) require(samples, "samples");
    *out = new vc_clip{voxcue::AudioClip(std::vector<double>(samples, samples + n), rate)};
  });
}

vc_status vc_clip_info(const vc_clip* clip, double* rate, size_t* n, double* duration) {
  return guard([&] {
    require(clip, "clip");
    if (rate) *rate = clip->clip.sample_rate();
    if (n) *n = clip->clip.size();
    if (duration) *duration = clip->clip.duration();
  });
}

void vc_clip_free(vc_clip* clip) { delete clip; }

vc_status vc_extract_features(const vc_config* cfg, const vc_clip* clip, double* values, int* present) {
  return guard([&] {
    require(values, "values");
    require(present, "present");
    const auto& c = config_or_default(cfg);
    c.validate();
    unpack(voxcue::extract_features(canonical(cfg, clip), c.analysis()), values, present);
  });
}

vc_status vc_segments_csv(const vc_config* cfg, const vc_clip* clip, vc_string** out) {
  return guard([&] {
    std::ostringstream o;
    voxcue::write_segmentation_csv(o, voxcue::segment(canonical(cfg, clip), config_or_default(cfg).analysis().segmentation));
    emit(out, o.str());
  });
}

vc_status vc_windows_csv(const vc_config* cfg, const vc_clip* clip, vc_string** out) {
  return guard([&] {
    std::ostringstream o;
    voxcue::write_window_csv(o, voxcue::extract_features_detailed(canonical(cfg, clip), config_or_default(cfg).analysis()));
    emit(out, o.str());
  });
}

vc_status vc_extract_manifest(const vc_config* cfg, const char* manifest_path, vc_feature_table** out,
                              vc_string** warnings, size_t* n_failed, size_t* n_entries) {
  return guard([&] {
    require(manifest_path, "manifest path");
    require(out, "output");
    const auto entries = voxcue::read_manifest(std::filesystem::path(manifest_path));
    auto rep = voxcue::extract_manifest(entries, config_or_default(cfg));
    std::string w;
    for (const auto& line : rep.warnings) w += line + '\n';
    if (warnings) *warnings = new vc_string{std::move(w)};
    if (n_failed) *n_failed = rep.failed;
    if (n_entries) *n_entries = entries.size();
    *out = new vc_feature_table{std::move(rep.table)};
  });
}

vc_status vc_feature_table_new(vc_feature_table** out) {
  return guard([&] {
    require(out, "output");
    *out = new vc_feature_table{};
  });
}

vc_status vc_feature_table_add(vc_feature_table* t, const char* speaker, vc_session session, const double* values,
                               const int* present) {
  return guard([&] {
    require(t, "table");
    require(speaker, "speaker");
    t->table.add({speaker, session_of(session), pack(values, present)});
  });
}

vc_status vc_feature_table_read(const char* path, vc_feature_table** out) {
  return guard([&] {
    require(path, "path");
    require(out, "output");
    *out = new vc_feature_table{voxcue::read_feature_csv(std::filesystem::path(path))};
  });
}

vc_status vc_feature_table_write(const vc_feature_table* t, const char* path) {
  return guard([&] {
    require(t, "table");
    require(path, "path");
    voxcue::write_feature_csv(std::filesystem::path(path), t->table);
  });
}

vc_status vc_feature_table_to_csv(const vc_feature_table* t, vc_string** out) {
  return guard([&] {
    require(t, "table");
    std::ostringstream o;
    voxcue::write_feature_csv(o, t->table);
    emit(out, o.str());
  });
}

size_t vc_feature_table_size(const vc_feature_table* t) { return t ? t->table.size() : 0; }

vc_status vc_feature_table_row(const vc_feature_table* t, size_t row, const char** speaker, vc_session* session,
                               double* values, int* present) {
  return guard([&] {
    require(t, "table");
    if (row >= t->table.size()) throw voxcue::Error(voxcue::ErrorCode::NotFound, "row index out of range");
    const auto& r = t->table.rows()[row];
    if (speaker) *speaker = r.speaker_id.c_str();
    if (session) *session = static_cast<vc_session>(r.session);
    unpack(r.features, values, present);
  });
}

void vc_feature_table_free(vc_feature_table* t) { delete t; }

vc_status vc_compare_topics(const vc_feature_table* t, vc_arrow_matrix** out) {
  return guard([&] {
    require(t, "table");
    require(out, "output");
    *out = new vc_arrow_matrix{voxcue::significance_matrix(t->table)};
  });
}

vc_status vc_arrow_matrix_read(const char* path, vc_arrow_matrix** out) {
  return guard([&] {
    require(path, "path");
    require(out, "output");
    *out = new vc_arrow_matrix{voxcue::read_arrow_csv(std::filesystem::path(path))};
  });
}

vc_status vc_arrow_matrix_write(const vc_arrow_matrix* m, const char* path) {
  return guard([&] {
    require(m, "matrix");
    require(path, "path");
    std::ofstream f(path);
    if (!f) throw voxcue::Error(voxcue::ErrorCode::Io, std::string("cannot write '") + path + "'");
    voxcue::write_arrow_csv(f, m->matrix);
  });
}

vc_status vc_arrow_matrix_to_csv(const vc_arrow_matrix* m, vc_string** out) {
  return guard([&] {
    require(m, "matrix");
    std::ostringstream o;
    voxcue::write_arrow_csv(o, m->matrix);
    emit(out, o.str());
  });
}

void vc_arrow_matrix_free(vc_arrow_matrix* m) { delete m; }

vc_status vc_transition_similarity(const vc_arrow_matrix* m, double alpha, vc_test test, double out[3]) {
  return guard([&] {
    require(m, "matrix");
    require(out, "output");
    const auto s = voxcue::transition_similarity(m->matrix, alpha, test == VC_TEST_T ? voxcue::TestKind::t : voxcue::TestKind::W);
    out[0] = s.c12_13;
    out[1] = s.c12_23;
    out[2] = s.c13_23;
  });
}

vc_status vc_paired_t(const double* a, const double* b, size_t n, double* statistic, double* p) {
  return guard([&] {
    require(a, "a");
    require(b, "b");
    const auto r = voxcue::paired_t_test(std::span<const double>(a, n), std::span<const double>(b, n));
    if (statistic) *statistic = r.statistic;
    if (p) *p = r.p_value;
  });
}

vc_status vc_wilcoxon(const double* a, const double* b, size_t n, double* w_plus, double* p) {
  return guard([&] {
    require(a, "a");
    require(b, "b");
    const auto r = voxcue::wilcoxon_signed_rank(std::span<const double>(a, n), std::span<const double>(b, n));
    if (w_plus) *w_plus = r.statistic;
    if (p) *p = r.p_value;
  });
}

vc_status vc_ratings_read(const char* path, vc_rating_table** out) {
  return guard([&] {
    require(path, "path");
    require(out, "output");
    *out = new vc_rating_table{voxcue::read_ratings_csv(std::filesystem::path(path))};
  });
}

void vc_ratings_free(vc_rating_table* r) { delete r; }

vc_status vc_train(const vc_config* cfg, const vc_feature_table* t, const vc_rating_table* r, const char* dv,
                   vc_session session, vc_rater rater, vc_model** out) {
  return guard([&] {
    require(t, "table");
    require(r, "ratings");
    require(dv, "dv");
    require(out, "output");
    const auto& c = config_or_default(cfg);
    c.validate();
    *out = new vc_model{voxcue::train_model(t->table, r->ratings, dv, session_of(session), rater_of(rater),
                                            c.stepwise(), c.stability())};
  });
}

vc_status vc_model_read(const char* path, vc_model** out) {
  return guard([&] {
    require(path, "path");
    require(out, "output");
    *out = new vc_model{voxcue::read_model(path)};
  });
}

vc_status vc_model_write(const vc_model* m, const char* path) {
  return guard([&] {
    require(m, "model");
    require(path, "path");
    voxcue::write_model(path, m->model);
  });
}

vc_status vc_model_to_json(const vc_model* m, vc_string** out) {
  return guard([&] {
    require(m, "model");
    emit(out, voxcue::model_to_json(m->model));
  });
}

vc_status vc_model_summary(const vc_model* m, size_t* n_predictors, double* train_r, int* stable) {
  return guard([&] {
    require(m, "model");
    if (n_predictors) *n_predictors = m->model.predictors.size();
    if (train_r) *train_r = m->model.train_r;
    if (stable) *stable = m->model.stability ? static_cast<int>(m->model.stability->stable) : -1;
  });
}

vc_status vc_model_predictor(const vc_model* m, size_t i, const char** name, double* beta, double* raw) {
  return guard([&] {
    require(m, "model");
    if (i >= m->model.predictors.size()) throw voxcue::Error(voxcue::ErrorCode::NotFound, "predictor index out of range");
    const auto& p = m->model.predictors[i];
    if (name) *name = p.name.c_str();
    if (beta) *beta = p.beta;
    if (raw) *raw = m->model.raw_coefficient(p);
  });
}

vc_status vc_evaluate(const vc_model* m, const vc_feature_table* t, const vc_rating_table* r, vc_session session,
                      vc_rater rater, double* r_out, size_t* n_out) {
  return guard([&] {
    require(m, "model");
    require(t, "table");
    require(r, "ratings");
    const auto e = voxcue::cross_session_eval(m->model, t->table, r->ratings, session_of(session), rater_of(rater));
    if (r_out) *r_out = e.r;
    if (n_out) *n_out = e.n;
  });
}

void vc_model_free(vc_model* m) { delete m; }

size_t vc_registry_size(void) { return voxcue::registry().size(); }

vc_status vc_registry_json(vc_string** out) {
  return guard([&] { emit(out, voxcue::registry_to_json(voxcue::registry())); });
}

vc_status vc_reference_score(const char* dv, vc_session session, const double* z, const int* present, double* score,
                             int* text_uncertain) {
  return guard([&] {
    require(dv, "dv");
    const auto rep = voxcue::score(voxcue::reference_model(dv, session_of(session)), pack(z, present));
    if (score) *score = rep.score;
    if (text_uncertain) *text_uncertain = rep.text_uncertain;
  });
}

vc_status vc_score_table(const vc_feature_table* t, const char* stats_path, vc_string** csv, size_t* n_unscored) {
  return guard([&] {
    require(t, "table");
    const auto stats = stats_path ? voxcue::read_reference_stats(std::filesystem::path(stats_path))
                                  : voxcue::reference_stats(t->table);
    const auto rows = voxcue::score_table(t->table, stats);
    std::ostringstream o;
    voxcue::write_score_csv(o, rows);
    if (n_unscored) {
      *n_unscored = 0;
      for (const auto& r : rows) *n_unscored += !r.report;
    }
    emit(csv, o.str());
  });
}

vc_status vc_reference_stats_write(const vc_feature_table* t, const char* path) {
  return guard([&] {
    require(t, "table");
    require(path, "path");
    std::ofstream f(path);
    if (!f) throw voxcue::Error(voxcue::ErrorCode::Io, std::string("cannot write '") + path + "'");
    voxcue::write_reference_stats(f, voxcue::reference_stats(t->table));
  });
}

vc_status vc_synth_corpus(const char* out_dir, size_t speakers, double session_seconds, uint64_t seed,
                          double sample_rate) {
  return guard([&] {
    require(out_dir, "output directory");
    voxcue::SynthParams p;
    p.speakers = speakers;
    p.session_seconds = session_seconds;
    p.seed = seed;
    if (sample_rate > 0) p.sample_rate = sample_rate;
    voxcue::write_synth_corpus(out_dir, p);
  });
}

}  // extern "C"
