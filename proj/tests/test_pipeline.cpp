#include <doctest.h>

#include <fstream>
#include <sstream>
#include <unistd.h>

#include "voxcue/error.hpp"
#include "voxcue/pipeline.hpp"
#include "voxcue/synth.hpp"

using namespace voxcue;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("voxcue_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SynthParams small() {
  SynthParams p;
  p.speakers = 4;
  p.session_seconds = 6.0;
  p.seed = 5;
  return p;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("default corpus shape") {
  const auto dir = scratch("shape");
  SynthParams p;
  p.session_seconds = 4.0;  // counts do not depend on length
  const auto corpus = write_synth_corpus(dir, p);
  CHECK(corpus.manifest.size() == 60);
  std::size_t wavs = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "wav")) wavs += e.path().extension() == ".wav";
  CHECK(wavs == 60);
  CHECK(read_manifest(dir / "manifest.csv").size() == 60);
  const auto ratings = read_ratings_csv(dir / "ratings.csv");
  CHECK(ratings.dvs().size() >= 5);
  CHECK(std::filesystem::exists(dir / "latents.csv"));
  for (const auto& s : corpus.speakers)
    for (const auto& [dv, sign] : synth_dvs()) {
      CHECK(ratings.get(s.id, dv, RaterType::P));
      CHECK(ratings.get(s.id, dv, RaterType::SA));
    }
  std::filesystem::remove_all(dir);
}

TEST_CASE("same seed gives byte-identical files") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  write_synth_corpus(a, small());
  write_synth_corpus(b, small());
  for (const auto& e : std::filesystem::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), a);
    CAPTURE(rel.string());
    CHECK(slurp(e.path()) == slurp(b / rel));
  }
  auto other = small();
  other.seed = 6;
  CHECK(synth_session(synth_speakers(other)[0], 0, Session::S1, other).samples()[5000] !=
        synth_session(synth_speakers(small())[0], 0, Session::S1, small()).samples()[5000]);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("latent attitude drives the pause-speech ratio") {
  SynthParams p;
  p.speakers = 10;
  p.session_seconds = 12.0;
  const auto speakers = synth_speakers(p);
  std::vector<double> a, psr;
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    const auto fv = extract_features(synth_session(speakers[i], i, Session::S1, p));
    REQUIRE(fv[Feature::pause_speech_ratio]);
    a.push_back(speakers[i].attitude);
    psr.push_back(*fv[Feature::pause_speech_ratio]);
  }
  double ma = 0, mp = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / a.size();
    mp += psr[i] / a.size();
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (psr[i] - mp);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (psr[i] - mp) * (psr[i] - mp);
  }
  CHECK(sab / std::sqrt(saa * sbb) < -0.8);
}

}  // TEST_SUITE

TEST_SUITE("pipeline") {

TEST_CASE("manifests") {
  std::stringstream in("path,speaker_id,session\na.wav,s1,S1\n/abs/b.wav,s2,2\n");
  const auto m = read_manifest(in, "/data/corpus");
  REQUIRE(m.size() == 2);
  CHECK(m[0].path == std::filesystem::path("/data/corpus/a.wav"));
  CHECK(m[1].path == std::filesystem::path("/abs/b.wav"));
  CHECK(m[1].session == Session::S2);
  std::stringstream out;
  write_manifest(out, m);
  const auto back = read_manifest(out);
  CHECK(back[0].path == m[0].path);
  CHECK(back[1].speaker_id == "s2");
  std::stringstream bad("file,speaker,session\n");
  CHECK_THROWS_AS(read_manifest(bad), Error);

  const auto dir = scratch("empty_manifest");
  { std::ofstream(dir / "m.csv"); }
  CHECK(read_manifest(dir / "m.csv").empty());
  CHECK(extract_manifest({}, RunConfig{}).table.empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("extraction keeps manifest order for any worker count") {
  const auto dir = scratch("order");
  auto corpus = write_synth_corpus(dir, small());
  auto entries = corpus.manifest;
  std::reverse(entries.begin(), entries.end());
  entries.insert(entries.begin() + 3, ManifestEntry{dir / "missing.wav", "ghost", Session::S1});

  RunConfig one, three;
  one.workers = 1;
  three.workers = 3;
  const auto a = extract_manifest(entries, one), b = extract_manifest(entries, three);
  CHECK(a.failed == 1);
  CHECK(b.failed == 1);
  CHECK(a.warnings == b.warnings);
  REQUIRE_FALSE(a.warnings.empty());
  CHECK(std::any_of(a.warnings.begin(), a.warnings.end(), [](const std::string& w) { return w.find("missing.wav") != std::string::npos; }));
  REQUIRE(a.table.size() == 12);
  std::stringstream sa, sb;
  write_feature_csv(sa, a.table);
  write_feature_csv(sb, b.table);
  CHECK(sa.str() == sb.str());
  CHECK(a.table.rows().front().speaker_id == entries.front().speaker_id);
  CHECK(a.table.rows().front().session == entries.front().session);

  auto dup = corpus.manifest;
  dup.push_back(dup.front());
  CHECK_THROWS_AS(extract_manifest(dup, one), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("score table") {
  FeatureTable t;
  for (int s = 0; s < 5; ++s) {
    FeatureRow r{"s" + std::to_string(s), Session::S1, {}};
    for (std::size_t i = 0; i < kFeatureCount; ++i) r.features.at(i) = double(s) + 0.01 * double(i * s);
    if (s == 4) r.features[Feature::cep1].reset();
    t.add(r);
  }
  const auto stats = reference_stats(t);
  const auto rows = score_table(t, stats);
  CHECK(rows.size() == 5 * 27);
  const auto missing = std::count_if(rows.begin(), rows.end(), [](const ScoreRow& r) { return !r.report; });
  CHECK(missing > 0);
  for (const auto& r : rows)
    if (!r.report) {
      CHECK(r.speaker_id == "s4");
      CHECK_FALSE(r.error.empty());
    }
  std::stringstream out;
  write_score_csv(out, rows);
  std::string comment, header;
  std::getline(out, comment);
  std::getline(out, header);
  CHECK(comment[0] == '#');
  CHECK(header == "speaker_id,session,dv,model_session,score,text_uncertain,top_terms");
}

}  // TEST_SUITE
