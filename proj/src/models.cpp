#include "voxcue/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>

#include "voxcue/csv.hpp"
#include "voxcue/error.hpp"
#include "voxcue/numeric.hpp"

namespace voxcue {

namespace {

struct Row {
  const char* dv;
  Session session;
  std::vector<std::pair<Feature, const char*>> terms;
  const char* r;
  bool uncertain = false;
};

using F = Feature;

const std::vector<Row>& raw_rows() {
  static const std::vector<Row> rows = {
      {"cooperative", Session::S1, {{F::pause_speech_ratio, "-.67"}, {F::mean_pause, "-.35"}, {F::cep1, "+.29"}}, ".81"},
      {"cooperative", Session::S2, {{F::pause_speech_ratio, "-.73"}, {F::b2, "+.26"}}, ".66"},
      {"cooperative", Session::S3, {{F::pause_speech_ratio, "-.78"}, {F::cep6, "+.26"}}, ".70"},

      {"practical_solution", Session::S1,
       {{F::pause_speech_ratio, "-.77"}, {F::intensity_std, "-.32"}, {F::f0_mean, "-.28"}}, ".63"},
      {"practical_solution", Session::S2, {{F::pause_speech_ratio, "-.71"}, {F::b2, "+.37"}}, ".60"},
      {"practical_solution", Session::S3,
       {{F::pause_speech_ratio, "-.77"}, {F::intensity_std, "-.29"}, {F::vowel_f0_range, "+.32"}, {F::cep6, "+.36"}},
       ".70"},

      {"serene", Session::S1, {{F::pause_speech_ratio, "-.83"}, {F::cep1, "+.43"}, {F::cep4, "+.60"}}, ".57"},
      {"serene", Session::S2, {{F::pause_speech_ratio, "-.71"}}, ".42"},
      {"serene", Session::S3,
       {{F::pause_speech_ratio, "-.95"}, {F::shimmer_apq5, "-.54"}, {F::cep4, "+.67"}, {F::cep6, "+.36"}}, ".70"},

      {"hesitant", Session::S1, {{F::pause_speech_ratio, "+.96"}, {F::vowel_std, "+.40"}, {F::cep4, "-.56"}}, ".70"},
      {"hesitant", Session::S2, {{F::pause_speech_ratio, "+.65"}, {F::rhythm, "+.35"}, {F::cep4, "-.53"}}, ".57"},
      {"hesitant", Session::S3, {{F::pause_speech_ratio, "+.73"}, {F::spkrate, "+.31"}, {F::cep4, "-.53"}}, ".60"},

      {"determined", Session::S1, {{F::pause_speech_ratio, "-.96"}, {F::cep1, "+.47"}, {F::cep4, "+.40"}}, ".66"},
      {"determined", Session::S2, {{F::pause_speech_ratio, "-.81"}}, ".54"},
      {"determined", Session::S3, {{F::pause_speech_ratio, "-.78"}, {F::cep6, "+.45"}}, ".55"},

      {"answered_properly", Session::S1,
       {{F::pause_speech_ratio, "-.69"},
        {F::f2, "+.37"},
        {F::cep1, "+.29"},
        {F::intensity_std, "-.30"},
        {F::jitter_ppq5, "+.30"}},
       ".64"},
      {"answered_properly", Session::S2, {{F::pause_speech_ratio, "-.59"}, {F::b2, "+.44"}}, ".59"},
      // Printed row is garbled ("ratio range ... Vowel F0"); read as a
      // pause-speech ratio term plus a separate vowel F0 range term.
      {"answered_properly", Session::S3,
       {{F::pause_speech_ratio, "-.61"}, {F::cep6, "+.41"}, {F::intensity_std, "-.26"}, {F::vowel_f0_range, "+.30"}},
       ".65", true},

      {"tremulous", Session::S1,
       {{F::pause_speech_ratio, "+.19"}, {F::cep1, "-.26"}, {F::cep4, "-.40"}, {F::cep7, "+.22"}}, ".59"},
      // Printed as "Pause-speech ech ratio".
      {"tremulous", Session::S2,
       {{F::pause_speech_ratio, "+.37"}, {F::b2, "-.25"}, {F::cep2, "+.15"}, {F::cep4, "-.36"}}, ".71", true},
      {"tremulous", Session::S3,
       {{F::mean_pause, "-.34"},
        {F::pauses_second, "-.26"},
        {F::pause_speech_ratio, "+.66"},
        {F::shimmer_apq5, "+.32"},
        {F::cep4, "-.18"},
        {F::cep6, "-.17"}},
       ".67"},

      {"turned_face_aside", Session::S1, {{F::jitter_loc, "-.41"}, {F::cep1, "-.40"}, {F::cep7, "+.44"}}, ".47"},
      {"turned_face_aside", Session::S2, {{F::pause_speech_ratio, "+.43"}, {F::cep1, "-.56"}, {F::cep7, "+.42"}}, ".50"},
      {"turned_face_aside", Session::S3,
       {{F::vowel_f0_range, "-.39"}, {F::b3, "-.37"}, {F::cep6, "-.56"}, {F::cep7, "+.64"}}, ".60"},

      {"breathed_rapidly", Session::S1, {{F::mean_pause, "+.46"}, {F::cep4, "-.56"}}, ".65"},
      {"breathed_rapidly", Session::S2,
       {{F::pauses_second, "-.31"}, {F::pause_speech_ratio, "+.65"}, {F::f2, "+.22"}, {F::cep4, "-.26"}}, ".71"},
      {"breathed_rapidly", Session::S3,
       {{F::pauses_second, "-.34"}, {F::pause_speech_ratio, "+.74"}, {F::shimmer_apq5, "+.44"}, {F::cep4, "-.42"}},
       ".74"},
  };
  return rows;
}

double parse_printed(const std::string& s) {
  const auto v = csv::parse_double(s);
  if (!v) throw Error(ErrorCode::Format, "bad coefficient text '" + s + "'");
  return *v;
}

}  // namespace

bool ReferenceModel::operator==(const ReferenceModel& o) const {
  if (dv != o.dv || session != o.session || train_r_text != o.train_r_text || train_r != o.train_r ||
      text_uncertain != o.text_uncertain || terms.size() != o.terms.size())
    return false;
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].feature != o.terms[i].feature || terms[i].coefficient_text != o.terms[i].coefficient_text ||
        terms[i].coefficient != o.terms[i].coefficient)
      return false;
  return true;
}

const std::vector<ReferenceModel>& registry() {
  static const std::vector<ReferenceModel> models = [] {
    std::vector<ReferenceModel> out;
    for (const auto& row : raw_rows()) {
      ReferenceModel m;
      m.dv = row.dv;
      m.session = row.session;
      for (const auto& [f, text] : row.terms) m.terms.push_back({f, text, parse_printed(text)});
      m.train_r_text = row.r;
      m.train_r = parse_printed(row.r);
      m.text_uncertain = row.uncertain;
      out.push_back(std::move(m));
    }
    return out;
  }();
  return models;
}

const ReferenceModel& reference_model(std::string_view dv, Session session) {
  for (const auto& m : registry())
    if (m.dv == dv && m.session == session) return m;
  throw Error(ErrorCode::NotFound, "no reference model for '" + std::string(dv) + "' in " + std::string(to_string(session)));
}

ScoreReport score(const ReferenceModel& model, const FeatureVector& z) {
  ScoreReport rep;
  rep.dv = model.dv;
  rep.session = model.session;
  rep.text_uncertain = model.text_uncertain;
  for (const auto& t : model.terms) {
    const auto& v = z[t.feature];
    if (!v)
      throw Error(ErrorCode::InvalidArgument, "missing value for predictor '" + std::string(feature_name(t.feature)) +
                                                  "' of " + model.dv + " " + std::string(to_string(model.session)));
    rep.terms.push_back({t.feature, t.coefficient, *v, t.coefficient * *v});
    rep.score += t.coefficient * *v;
  }
  return rep;
}

FeatureVector standardize_against(const FeatureVector& x, const ReferenceStats& stats,
                                  const std::vector<Feature>& needed) {
  std::vector<Feature> want = needed;
  if (want.empty())
    for (std::size_t i = 0; i < kFeatureCount; ++i)
      if (x.at(i)) want.push_back(static_cast<Feature>(i));
  FeatureVector z;
  for (Feature f : want) {
    const auto& s = stats[index(f)];
    if (!s) throw Error(ErrorCode::NotFound, "no reference statistics for '" + std::string(feature_name(f)) + "'");
    if (!(s->std > 0.0))
      throw Error(ErrorCode::Degenerate, "reference std for '" + std::string(feature_name(f)) + "' is not positive");
    if (x[f]) z[f] = (*x[f] - s->mean) / s->std;
  }
  return z;
}

ReferenceStats reference_stats(const FeatureTable& table) {
  ReferenceStats out{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    std::vector<double> col;
    for (const auto& row : table.rows())
      if (row.features.at(i)) col.push_back(*row.features.at(i));
    try {
      out[i] = zscore_fit(col);
    } catch (const Error&) {
    }
  }
  return out;
}

void write_reference_stats(std::ostream& out, const ReferenceStats& stats) {
  out << "feature,mean,std\n";
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (stats[i])
      out << feature_names()[i] << ',' << csv::format_double(stats[i]->mean) << ','
          << csv::format_double(stats[i]->std) << '\n';
}

ReferenceStats read_reference_stats(std::istream& in) {
  std::vector<std::string> f;
  std::size_t line = 0;
  if (!csv::next_record(in, f, line) || f.size() != 3 || csv::trim(f[0]) != "feature")
    throw Error(ErrorCode::Format, "statistics CSV: header must be feature,mean,std");
  ReferenceStats out{};
  while (csv::next_record(in, f, line)) {
    const auto where = "statistics CSV line " + std::to_string(line);
    if (f.size() != 3) throw Error(ErrorCode::Format, where + ": expected 3 fields");
    const auto feat = feature_from_name(csv::trim(f[0]));
    if (!feat) throw Error(ErrorCode::Format, where + ": unknown feature '" + csv::trim(f[0]) + "'");
    const auto m = csv::parse_double(f[1]);
    const auto s = csv::parse_double(f[2]);
    if (!m || !s) throw Error(ErrorCode::Format, where + ": mean and std must be numbers");
    if (out[index(*feat)]) throw Error(ErrorCode::DuplicateKey, where + ": duplicate feature");
    out[index(*feat)] = Standardization{*m, *s};
  }
  return out;
}

ReferenceStats read_reference_stats(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return read_reference_stats(in);
}

RegressionModel to_regression_model(const ReferenceModel& m) {
  RegressionModel r;
  r.dv = m.dv;
  r.session = m.session;
  r.rater_type = RaterType::P;
  r.train_r = m.train_r;
  for (const auto& t : m.terms) {
    r.predictors.push_back({std::string(feature_name(t.feature)), t.coefficient});
    r.standardization[std::string(feature_name(t.feature))] = {0.0, 1.0};
  }
  return r;
}

using nlohmann::json;

std::string registry_to_json(const std::vector<ReferenceModel>& models) {
  json arr = json::array();
  for (const auto& m : models) {
    json j = json::parse(model_to_json(to_regression_model(m)));
    j["train_r_text"] = m.train_r_text;
    j["text_uncertain"] = m.text_uncertain;
    for (std::size_t i = 0; i < m.terms.size(); ++i) j["predictors"][i]["coefficient_text"] = m.terms[i].coefficient_text;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

std::vector<ReferenceModel> registry_from_json(const std::string& text) {
  std::vector<ReferenceModel> out;
  try {
    const json arr = json::parse(text);
    if (!arr.is_array()) throw Error(ErrorCode::Format, "registry file: expected an array of models");
    for (const auto& j : arr) {
      const auto base = model_from_json(j.dump());
      ReferenceModel m;
      m.dv = base.dv;
      m.session = base.session;
      m.train_r = base.train_r;
      m.train_r_text = j.at("train_r_text").get<std::string>();
      m.text_uncertain = j.at("text_uncertain").get<bool>();
      const auto& preds = j.at("predictors");
      for (std::size_t i = 0; i < base.predictors.size(); ++i)
        m.terms.push_back({*feature_from_name(base.predictors[i].name),
                           preds[i].at("coefficient_text").get<std::string>(), base.predictors[i].beta});
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("registry file: ") + e.what());
  }
  return out;
}

}  // namespace voxcue
