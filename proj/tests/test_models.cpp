#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "voxcue/csv.hpp"
#include "voxcue/error.hpp"
#include "voxcue/models.hpp"

using namespace voxcue;

namespace {

struct FixtureRow {
  std::string dv, session, predictor, coefficient, train_r;
};

std::vector<FixtureRow> fixture() {
  std::ifstream in(std::string(VOXCUE_SOURCE_DIR) + "/tests/fixtures/published_models.csv");
  REQUIRE(in);
  std::vector<FixtureRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::stringstream ss(line);
    FixtureRow r;
    std::getline(ss, r.dv, ',');
    std::getline(ss, r.session, ',');
    std::getline(ss, r.predictor, ',');
    std::getline(ss, r.coefficient, ',');
    std::getline(ss, r.train_r, ',');
    rows.push_back(r);
  }
  return rows;
}

FeatureVector unit(Feature f, double v = 1.0) {
  FeatureVector z;
  for (std::size_t i = 0; i < kFeatureCount; ++i) z.at(i) = 0.0;
  z[f] = v;
  return z;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("registry matches the transcription fixture as text") {
  const auto rows = fixture();
  CHECK(rows.size() == 84);
  const auto& reg = registry();
  REQUIRE(reg.size() == 27);
  std::size_t k = 0;
  for (const auto& m : reg) {
    CHECK(std::find(kReferenceDvs.begin(), kReferenceDvs.end(), m.dv) != kReferenceDvs.end());
    for (const auto& t : m.terms) {
      REQUIRE(k < rows.size());
      const auto& r = rows[k++];
      CAPTURE(r.dv);
      CAPTURE(r.session);
      CHECK(r.dv == m.dv);
      CHECK(r.session == to_string(m.session));
      CHECK(r.predictor == feature_name(t.feature));
      CHECK(r.coefficient == t.coefficient_text);
      CHECK(r.train_r == m.train_r_text);
      CHECK(t.coefficient == std::stod(t.coefficient_text));
    }
    CHECK(m.train_r == std::stod(m.train_r_text));
  }
  CHECK(k == rows.size());
  for (const auto& dv : kReferenceDvs)
    for (int s = 1; s <= 3; ++s) CHECK_NOTHROW(reference_model(dv, static_cast<Session>(s)));
  CHECK_THROWS_AS(reference_model("curious", Session::S1), Error);
}

TEST_CASE("published examples") {
  const auto& coop = reference_model("cooperative", Session::S1);
  REQUIRE(coop.terms.size() == 3);
  CHECK(coop.terms[0].feature == Feature::pause_speech_ratio);
  CHECK(coop.terms[0].coefficient_text == "-.67");
  CHECK(coop.terms[1].feature == Feature::mean_pause);
  CHECK(coop.terms[2].feature == Feature::cep1);
  CHECK(coop.train_r_text == ".81");

  const auto& serene = reference_model("serene", Session::S2);
  REQUIRE(serene.terms.size() == 1);
  CHECK(serene.terms[0].coefficient_text == "-.71");
  CHECK(serene.train_r_text == ".42");

  const auto& det = reference_model("determined", Session::S3);
  REQUIRE(det.terms.size() == 2);
  CHECK(det.terms[1].feature == Feature::cep6);
  CHECK(det.terms[1].coefficient_text == "+.45");
  CHECK(det.train_r_text == ".55");

  CHECK(reference_model("turned_face_aside", Session::S1).text_uncertain == false);
  int uncertain = 0;
  for (const auto& m : registry()) uncertain += m.text_uncertain;
  CHECK(uncertain == 2);
}

TEST_CASE("scoring") {
  const auto zero = unit(Feature::spkrate, 0.0);
  for (const auto& m : registry()) CHECK(score(m, zero).score == 0.0);

  const auto r = score(reference_model("cooperative", Session::S1), unit(Feature::pause_speech_ratio));
  CHECK(std::abs(r.score - -0.67) <= 1e-9);
  REQUIRE(r.terms.size() == 3);
  CHECK(r.terms[0].product == doctest::Approx(-0.67));

  auto z = unit(Feature::pause_speech_ratio);
  z[Feature::vowel_std] = 1.0;
  z[Feature::cep4] = 1.0;
  CHECK(std::abs(score(reference_model("hesitant", Session::S1), z).score - 0.80) <= 1e-9);

  FeatureVector missing;
  missing[Feature::pause_speech_ratio] = 1.0;
  try {
    score(reference_model("cooperative", Session::S1), missing);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(std::string(e.what()).find("mean_pause") != std::string::npos);
  }
}

TEST_CASE("score is linear and sums its terms") {
  std::mt19937_64 g(3);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 20; ++rep) {
    FeatureVector a, b, c;
    const double x = n(g), y = n(g);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      a.at(i) = n(g);
      b.at(i) = n(g);
      c.at(i) = x * *a.at(i) + y * *b.at(i);
    }
    for (const auto& m : registry()) {
      const auto sc = score(m, c);
      CHECK(std::abs(sc.score - (x * score(m, a).score + y * score(m, b).score)) <= 1e-9);
      double total = 0;
      for (const auto& t : sc.terms) total += t.product;
      CHECK(std::abs(total - sc.score) <= 1e-9);
    }
  }
}

TEST_CASE("pause-speech ratio signs") {
  const auto rows = fixture();
  const std::vector<std::string> positive{"cooperative", "practical_solution", "serene", "determined", "answered_properly"};
  for (const auto& m : registry()) {
    const bool has = std::any_of(m.terms.begin(), m.terms.end(), [](const ReferenceTerm& t) { return t.feature == Feature::pause_speech_ratio; });
    if (!has) continue;
    const double d = score(m, unit(Feature::pause_speech_ratio, 1.0)).score - score(m, unit(Feature::pause_speech_ratio, 0.0)).score;
    const auto it = std::find_if(rows.begin(), rows.end(), [&](const FixtureRow& r) {
      return r.dv == m.dv && r.session == to_string(m.session) && r.predictor == "pause_speech_ratio";
    });
    REQUIRE(it != rows.end());
    CHECK((d < 0) == (it->coefficient[0] == '-'));
    if (std::find(positive.begin(), positive.end(), m.dv) != positive.end()) CHECK(d < 0);
    if (m.dv == "hesitant" || m.dv == "tremulous") CHECK(d > 0);
  }
  for (const auto& dv : positive) {
    const auto& m = reference_model(dv, Session::S1);
    CHECK(score(m, unit(Feature::pause_speech_ratio)).score - score(m, unit(Feature::pause_speech_ratio, 0)).score < 0);
  }
}

TEST_CASE("standardize against reference statistics") {
  ReferenceStats stats;
  FeatureVector x, shifted;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    stats[i] = Standardization{double(i), 0.5 + double(i)};
    x.at(i) = double(i);
    shifted.at(i) = double(i) + 0.5 + double(i);
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    CHECK(*standardize_against(x, stats).at(i) == 0.0);
    CHECK(*standardize_against(shifted, stats).at(i) == doctest::Approx(1.0));
  }
  ReferenceStats unit_stats;
  for (auto& s : unit_stats) s = Standardization{0.0, 1.0};
  CHECK(standardize_against(shifted, unit_stats) == shifted);

  auto gap = stats;
  gap[index(Feature::f2)].reset();
  try {
    standardize_against(x, gap);
    FAIL("expected NotFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotFound);
  }
  CHECK_NOTHROW(standardize_against(x, gap, {Feature::spkrate, Feature::f1}));
  auto flat = stats;
  flat[index(Feature::f1)] = Standardization{1.0, 0.0};
  try {
    standardize_against(x, flat);
    FAIL("expected Degenerate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Degenerate);
  }
  FeatureVector partial;
  partial[Feature::f0_mean] = 7.0;
  const auto zp = standardize_against(partial, stats);
  CHECK(zp.present_count() == 1);
}

TEST_CASE("reference statistics from a table round trip") {
  FeatureTable t;
  for (int s = 0; s < 6; ++s) {
    FeatureRow r{"s" + std::to_string(s), Session::S1, {}};
    for (std::size_t i = 0; i < kFeatureCount; ++i) r.features.at(i) = double(s * s) + 0.1 * double(i);
    r.features[Feature::b3] = 2.0;
    t.add(r);
  }
  const auto stats = reference_stats(t);
  CHECK(stats[index(Feature::spkrate)]->mean == doctest::Approx(55.0 / 6));
  CHECK_FALSE(stats[index(Feature::b3)]);
  std::stringstream ss;
  write_reference_stats(ss, stats);
  const auto back = read_reference_stats(ss);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    REQUIRE(back[i].has_value() == stats[i].has_value());
    if (stats[i]) {
      CHECK(back[i]->mean == stats[i]->mean);
      CHECK(back[i]->std == stats[i]->std);
    }
  }
}

TEST_CASE("registry JSON") {
  const auto text = registry_to_json(registry());
  const auto back = registry_from_json(text);
  CHECK(back == registry());

  std::ifstream in(std::string(VOXCUE_DATA_DIR) + "/reference_models.json");
  REQUIRE(in);
  std::stringstream shipped;
  shipped << in.rdbuf();
  CHECK(registry_from_json(shipped.str()) == registry());

  for (const auto& m : registry()) {
    const auto rm = to_regression_model(m);
    const auto again = model_from_json(model_to_json(rm));
    CHECK(again.predictors.size() == m.terms.size());
    FeatureVector z = unit(Feature::pause_speech_ratio, 0.7);
    z[Feature::cep1] = -0.2;
    // Identity standardization and a unit DV scale: prediction equals the score.
    CHECK(*again.predict(z) == doctest::Approx(score(m, z).score).epsilon(1e-12));
  }
}

}  // TEST_SUITE
