// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "voxcue/voxcue.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kStatistical = 3, kPartial = 4, kUnstable = 5 };

struct Failure {
  int code;
};

int exit_for(vc_status s) {
  return s == VC_ERR_INSUFFICIENT_DATA || s == VC_ERR_DEGENERATE ? kStatistical : kInput;
}

void check(vc_status s, const std::string& what) {
  if (s == VC_OK) return;
  std::cerr << "voxcue: " << what << ": " << vc_last_error() << " [" << vc_status_name(s) << "]\n";
  throw Failure{exit_for(s)};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using String = Handle<vc_string, vc_string_free>;
using Config = Handle<vc_config, vc_config_free>;
using Table = Handle<vc_feature_table, vc_feature_table_free>;
using Arrows = Handle<vc_arrow_matrix, vc_arrow_matrix_free>;
using Ratings = Handle<vc_rating_table, vc_ratings_free>;
using Model = Handle<vc_model, vc_model_free>;
using Clip = Handle<vc_clip, vc_clip_free>;

vc_session session_arg(const std::string& s) {
  if (s == "1" || s == "S1" || s == "s1") return VC_S1;
  if (s == "2" || s == "S2" || s == "s2") return VC_S2;
  if (s == "3" || s == "S3" || s == "s3") return VC_S3;
  std::cerr << "voxcue: session must be S1, S2 or S3 (got '" << s << "')\n";
  throw Failure{kUsage};
}

vc_rater rater_arg(const std::string& s) {
  if (s == "P" || s == "p") return VC_RATER_P;
  if (s == "SA" || s == "sa") return VC_RATER_SA;
  std::cerr << "voxcue: rater type must be P or SA (got '" << s << "')\n";
  throw Failure{kUsage};
}

void write_text(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) {
    std::cerr << "voxcue: cannot write '" << path << "'\n";
    throw Failure{kInput};
  }
  f << text;
}

struct Globals {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string emit_config;
  bool quiet = false;
};

void resolve_config(const Globals& g, Config& cfg, std::optional<double> rate = std::nullopt) {
  if (g.config_file.empty()) check(vc_config_new(cfg.out()), "config");
  else check(vc_config_load(g.config_file.c_str(), cfg.out()), "config");
  for (const auto& o : g.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      std::cerr << "voxcue: --set expects key=value (got '" << o << "')\n";
      throw Failure{kUsage};
    }
    check(vc_config_set(cfg.get(), o.substr(0, eq).c_str(), o.substr(eq + 1).c_str()), "config override");
  }
  if (rate) check(vc_config_set(cfg.get(), "sample_rate", std::to_string(*rate).c_str()), "--rate");
  check(vc_config_validate(cfg.get()), "config");
  String text;
  check(vc_config_to_text(cfg.get(), text.out()), "config");
  if (!g.emit_config.empty()) write_text(g.emit_config, vc_string_data(text.get()));
  else if (!g.quiet) std::cerr << "# resolved config\n" << vc_string_data(text.get());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxcue: nonverbal speech descriptors, topic comparison and attitude prediction models"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "override one configuration key (key=value), repeatable");
  app.add_option("--emit-config", g.emit_config, "write the resolved configuration here instead of stderr");
  app.add_flag("-q,--quiet", g.quiet, "do not print the resolved configuration");
  app.set_version_flag("--version", vc_version());

  std::optional<double> rate;
  std::string manifest, features, out, arrows, ratings, dv, session = "S1", rater = "P", model_path, stats,
      write_stats, test = "W", wav, corpus_dir;
  std::vector<double> alphas;
  std::size_t speakers = 20;
  double seconds = 20.0;
  std::optional<std::uint64_t> seed;

  auto* extract = app.add_subcommand("extract", "compute the 30 descriptors for every manifest entry");
  extract->add_option("--manifest", manifest, "CSV with path,speaker_id,session")->required();
  extract->add_option("-o,--out", out, "feature CSV (default stdout)");
  extract->add_option("--rate", rate, "analysis sample rate in Hz (default 11025)");

  auto* compare = app.add_subcommand("compare-topics", "paired t and signed-rank tests across sessions");
  compare->add_option("--features", features, "feature CSV")->required();
  compare->add_option("-o,--out", out, "arrow-matrix CSV (default stdout)");

  auto* similarity = app.add_subcommand("transition-similarity", "cosine similarity of transition vectors");
  similarity->add_option("--arrows", arrows, "arrow-matrix CSV")->required();
  similarity->add_option("--alpha", alphas, "significance levels (default: config alpha_levels)");
  similarity->add_option("--test", test, "t or W (default W)")->check(CLI::IsMember({"t", "W"}));
  similarity->add_option("-o,--out", out, "report CSV (default stdout)");

  auto* train = app.add_subcommand("train", "stepwise model with leave-one-out stability; exit 5 when unstable");
  train->add_option("--features", features, "feature CSV")->required();
  train->add_option("--ratings", ratings, "ratings CSV")->required();
  train->add_option("--dv", dv, "dependent variable")->required();
  train->add_option("--session", session, "training session S1..S3")->required();
  train->add_option("--rater", rater, "rater type (only P is accepted)");
  train->add_option("-o,--out", out, "model file")->required();

  auto* evaluate = app.add_subcommand("evaluate", "correlate a model's predictions with ratings of a session");
  evaluate->add_option("--model", model_path, "model file")->required();
  evaluate->add_option("--features", features, "feature CSV")->required();
  evaluate->add_option("--ratings", ratings, "ratings CSV")->required();
  evaluate->add_option("--session", session, "test session S1..S3")->required();
  evaluate->add_option("--rater", rater, "P or SA");

  auto* score = app.add_subcommand("score", "score recordings against the published reference models");
  score->add_option("--features", features, "feature CSV")->required();
  score->add_option("--stats", stats, "reference statistics CSV feature,mean,std (default: the table itself)");
  score->add_option("--write-stats", write_stats, "also write the table's own statistics here");
  score->add_option("-o,--out", out, "score CSV (default stdout)");

  auto* synth = app.add_subcommand("synth-corpus", "write a synthetic interview corpus with known ground truth");
  synth->add_option("-o,--out", corpus_dir, "output directory")->required();
  synth->add_option("--speakers", speakers, "number of speakers (default 20)");
  synth->add_option("--seconds", seconds, "length of each session recording (default 20)");
  synth->add_option("--seed", seed, "random seed (default: config seed)");
  synth->add_option("--rate", rate, "sample rate in Hz (default 11025)");

  auto* registry = app.add_subcommand("registry", "export the reference models in the model file format");
  registry->add_option("-o,--out", out, "JSON file (default stdout)");

  auto* segments = app.add_subcommand("segments", "debug: vowel and pause segments of one recording");
  segments->add_option("--wav", wav, "WAV file")->required();
  segments->add_option("--rate", rate, "analysis sample rate in Hz (default 11025)");
  segments->add_option("-o,--out", out, "CSV (default stdout)");

  auto* windows = app.add_subcommand("windows", "debug: per stressed-vowel window measures of one recording");
  windows->add_option("--wav", wav, "WAV file")->required();
  windows->add_option("--rate", rate, "analysis sample rate in Hz (default 11025)");
  windows->add_option("-o,--out", out, "CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    Config cfg;
    resolve_config(g, cfg, rate);

    if (*extract) {
      Table table;
      String warnings;
      std::size_t failed = 0, entries = 0;
      check(vc_extract_manifest(cfg.get(), manifest.c_str(), table.out(), warnings.out(), &failed, &entries),
            "extract");
      std::cerr << vc_string_data(warnings.get());
      String csv;
      check(vc_feature_table_to_csv(table.get(), csv.out()), "extract");
      write_text(out, vc_string_data(csv.get()));
      if (failed && failed == entries) return kInput;
      return failed ? kPartial : kOk;
    }

    if (*compare) {
      Table table;
      check(vc_feature_table_read(features.c_str(), table.out()), "features");
      Arrows m;
      check(vc_compare_topics(table.get(), m.out()), "compare-topics");
      String csv;
      check(vc_arrow_matrix_to_csv(m.get(), csv.out()), "compare-topics");
      write_text(out, vc_string_data(csv.get()));
      return kOk;
    }

    if (*similarity) {
      Arrows m;
      check(vc_arrow_matrix_read(arrows.c_str(), m.out()), "arrows");
      if (alphas.empty()) {
        double levels[16];
        std::size_t n = 0;
        check(vc_config_alpha_levels(cfg.get(), levels, 16, &n), "config");
        alphas.assign(levels, levels + std::min<std::size_t>(n, 16));
      }
      std::string report = "alpha,test,cos_1->2_1->3,cos_1->2_2->3,cos_1->3_2->3\n";
      for (double a : alphas) {
        double c[3];
        check(vc_transition_similarity(m.get(), a, test == "t" ? VC_TEST_T : VC_TEST_W, c), "transition-similarity");
        char line[160];
        std::snprintf(line, sizeof line, "%g,%s,%.4f,%.4f,%.4f\n", a, test.c_str(), c[0], c[1], c[2]);
        report += line;
      }
      write_text(out, report.c_str());
      return kOk;
    }

    if (*train) {
      Table table;
      check(vc_feature_table_read(features.c_str(), table.out()), "features");
      Ratings r;
      check(vc_ratings_read(ratings.c_str(), r.out()), "ratings");
      Model m;
      check(vc_train(cfg.get(), table.get(), r.get(), dv.c_str(), session_arg(session), rater_arg(rater), m.out()),
            "train");
      check(vc_model_write(m.get(), out.c_str()), "train");
      std::size_t n = 0;
      double train_r = 0;
      int stable = -1;
      check(vc_model_summary(m.get(), &n, &train_r, &stable), "train");
      std::printf("dv=%s session=%s predictors=%zu train_r=%.4f stable=%s\n", dv.c_str(), session.c_str(), n, train_r,
                  stable == 1 ? "yes" : "no");
      for (std::size_t i = 0; i < n; ++i) {
        const char* name = nullptr;
        double beta = 0, raw = 0;
        check(vc_model_predictor(m.get(), i, &name, &beta, &raw), "train");
        std::printf("  %-20s beta=%+.4f raw=%+.6g\n", name, beta, raw);
      }
      return stable == 1 ? kOk : kUnstable;
    }

    if (*evaluate) {
      Model m;
      check(vc_model_read(model_path.c_str(), m.out()), "model");
      Table table;
      check(vc_feature_table_read(features.c_str(), table.out()), "features");
      Ratings r;
      check(vc_ratings_read(ratings.c_str(), r.out()), "ratings");
      double rv = 0;
      std::size_t n = 0;
      check(vc_evaluate(m.get(), table.get(), r.get(), session_arg(session), rater_arg(rater), &rv, &n), "evaluate");
      std::printf("session=%s rater=%s n=%zu r=%.6f\n", session.c_str(), rater.c_str(), n, rv);
      return kOk;
    }

    if (*score) {
      Table table;
      check(vc_feature_table_read(features.c_str(), table.out()), "features");
      if (!write_stats.empty()) check(vc_reference_stats_write(table.get(), write_stats.c_str()), "score");
      String csv;
      std::size_t unscored = 0;
      check(vc_score_table(table.get(), stats.empty() ? nullptr : stats.c_str(), csv.out(), &unscored), "score");
      write_text(out, vc_string_data(csv.get()));
      if (unscored) std::cerr << "voxcue: " << unscored << " (recording, model) pairs could not be scored\n";
      if (unscored && unscored == vc_feature_table_size(table.get()) * vc_registry_size()) return kStatistical;
      return unscored ? kPartial : kOk;
    }

    if (*synth) {
      std::uint64_t s = 0;
      check(vc_config_get_seed(cfg.get(), &s), "config");
      check(vc_synth_corpus(corpus_dir.c_str(), speakers, seconds, seed.value_or(s), rate.value_or(0.0)),
            "synth-corpus");
      return kOk;
    }

    if (*registry) {
      String json;
      check(vc_registry_json(json.out()), "registry");
      write_text(out, (std::string(vc_string_data(json.get())) + "\n").c_str());
      return kOk;
    }

    if (*segments || *windows) {
      Clip clip;
      check(vc_clip_load(wav.c_str(), 0.0, clip.out()), "audio");
      String csv;
      check(*segments ? vc_segments_csv(cfg.get(), clip.get(), csv.out())
                      : vc_windows_csv(cfg.get(), clip.get(), csv.out()),
            "analysis");
      write_text(out, vc_string_data(csv.get()));
      return kOk;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kUsage;
}
