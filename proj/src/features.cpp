#include "voxcue/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>

#include "voxcue/csv.hpp"
#include "voxcue/error.hpp"
#include "voxcue/numeric.hpp"

namespace voxcue {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "spkrate",       "mean_pause",     "pauses_second", "pause_speech_ratio", "rhythm",
      "vowel_mean",    "vowel_std",      "intensity_std", "f0_std",             "f0_mean",
      "vowel_f0_range", "harmonicity",   "jitter_loc",    "jitter_ppq5",        "shimmer_loc",
      "shimmer_apq5",  "f1",             "f2",            "f3",                 "b1",
      "b2",            "b3",             "cep1",          "cep2",               "cep3",
      "cep4",          "cep5",           "cep6",          "cep7",               "cep8",
  };
  return names;
}

std::string_view feature_name(Feature f) { return feature_names()[index(f)]; }

std::optional<Feature> feature_from_name(std::string_view name) {
  const auto& names = feature_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<Feature>(i);
  return std::nullopt;
}

std::size_t FeatureVector::present_count() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); }));
}

std::string_view to_string(Session s) {
  switch (s) {
    case Session::S1: return "S1";
    case Session::S2: return "S2";
    case Session::S3: return "S3";
  }
  return "S?";
}

Session parse_session(std::string_view s) {
  std::string t = csv::trim(s);
  for (char& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (t == "S1" || t == "1") return Session::S1;
  if (t == "S2" || t == "2") return Session::S2;
  if (t == "S3" || t == "3") return Session::S3;
  throw Error(ErrorCode::Format, "unknown session '" + std::string(s) + "'");
}

void FeatureTable::add(FeatureRow row) {
  auto key = std::make_pair(row.speaker_id, static_cast<int>(row.session));
  if (index_.count(key))
    throw Error(ErrorCode::DuplicateKey,
                "duplicate feature row (" + row.speaker_id + ", " + std::string(to_string(row.session)) + ")");
  index_.emplace(std::move(key), rows_.size());
  rows_.push_back(std::move(row));
}

const FeatureRow* FeatureTable::find(std::string_view speaker, Session session) const {
  auto it = index_.find(std::make_pair(std::string(speaker), static_cast<int>(session)));
  return it == index_.end() ? nullptr : &rows_[it->second];
}

std::vector<std::string> FeatureTable::speakers() const {
  std::vector<std::string> out;
  for (const auto& r : rows_)
    if (std::find(out.begin(), out.end(), r.speaker_id) == out.end()) out.push_back(r.speaker_id);
  return out;
}

FeatureTable build_table(std::vector<FeatureRow> rows) {
  FeatureTable table;
  for (auto& r : rows) table.add(std::move(r));
  return table;
}

std::span<const double> window_around(const AudioClip& clip, double center, double length) {
  const auto samples = clip.samples();
  const auto len = std::min(samples.size(), static_cast<std::size_t>(std::lround(length * clip.sample_rate())));
  long start = std::lround(center * clip.sample_rate()) - static_cast<long>(len / 2);
  start = std::clamp(start, 0L, static_cast<long>(samples.size() - len));
  return samples.subspan(static_cast<std::size_t>(start), len);
}

namespace {

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return mean(v);
}

std::optional<double> std_of(const std::vector<double>& v) {
  if (v.size() < 2) return std::nullopt;
  return sample_std(v);
}

VowelWindowMeasures measure_window(const AudioClip& clip, double center, const AnalysisParams& params) {
  VowelWindowMeasures m;
  m.center = center;
  const double rate = clip.sample_rate();

  const auto prosody = window_around(clip, center, params.prosody_window);
  for (const auto& f : estimate_f0(prosody, rate, params.pitch))
    if (f) m.f0.push_back(*f);
  m.intensity_db = intensity_db(prosody);
  if (!m.f0.empty()) {
    m.f0_mean = mean(m.f0);
    m.f0_min = *std::min_element(m.f0.begin(), m.f0.end());
    m.f0_max = *std::max_element(m.f0.begin(), m.f0.end());
    std::vector<double> sorted = m.f0;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t h = sorted.size() / 2;
    const double median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
    if (auto cycles = mark_cycles(prosody, rate, median))
      m.perturbation = jitter_shimmer(cycles->periods, cycles->amplitudes);
    m.hnr = harmonicity_db(prosody, rate, median);
  }

  const auto spectral = window_around(clip, center, params.spectral_window);
  m.formants = lpc_formants(spectral, rate, params.formants);
  m.mfcc = mfcc(spectral, rate, params.mfcc);
  return m;
}

}  // namespace

FeatureVector temporal_features(const SegmentationResult& seg) {
  FeatureVector fv;
  double vowel_total = 0.0;
  std::vector<double> vowel_durations;
  for (const auto& v : seg.vowels) {
    vowel_total += v.duration();
    vowel_durations.push_back(v.duration());
  }
  double pause_total = 0.0;
  for (const auto& p : seg.pauses) pause_total += p.duration();

  if (seg.total_speech > 0.0) {
    fv[Feature::spkrate] = vowel_total / seg.total_speech;
    fv[Feature::pause_speech_ratio] = pause_total / seg.total_speech;
  }
  if (!seg.pauses.empty()) fv[Feature::mean_pause] = pause_total / static_cast<double>(seg.pauses.size());
  if (seg.total_duration > 0.0) {
    fv[Feature::pauses_second] = static_cast<double>(seg.pauses.size()) / seg.total_duration;
    fv[Feature::rhythm] = static_cast<double>(seg.vowels.size()) / seg.total_duration;
  }
  fv[Feature::vowel_mean] = mean_of(vowel_durations);
  fv[Feature::vowel_std] = std_of(vowel_durations);

  return fv;
}

FeatureExtraction extract_features_detailed(const AudioClip& clip, const AnalysisParams& params) {
  FeatureExtraction ex;
  ex.segmentation = segment(clip, params.segmentation);
  const auto& seg = ex.segmentation;
  FeatureVector& fv = ex.features;

  fv = temporal_features(seg);

  std::vector<double> pooled_f0, ranges, intensities, hnr, jl, jp, sl, sa;
  std::array<std::vector<double>, 3> formant_f, formant_b;
  std::vector<std::vector<double>> cep(static_cast<std::size_t>(params.mfcc.coefficients));
  for (const auto& v : seg.vowels) {
    if (!v.stressed) continue;
    auto m = measure_window(clip, v.center(), params);
    pooled_f0.insert(pooled_f0.end(), m.f0.begin(), m.f0.end());
    if (m.f0_min && m.f0_max) ranges.push_back(*m.f0_max - *m.f0_min);
    intensities.push_back(m.intensity_db);
    if (m.hnr) hnr.push_back(*m.hnr);
    if (m.perturbation.jitter_local) jl.push_back(*m.perturbation.jitter_local);
    if (m.perturbation.jitter_ppq5) jp.push_back(*m.perturbation.jitter_ppq5);
    if (m.perturbation.shimmer_local) sl.push_back(*m.perturbation.shimmer_local);
    if (m.perturbation.shimmer_apq5) sa.push_back(*m.perturbation.shimmer_apq5);
    for (std::size_t k = 0; k < 3; ++k) {
      if (m.formants.frequency[k]) formant_f[k].push_back(*m.formants.frequency[k]);
      if (m.formants.bandwidth[k]) formant_b[k].push_back(*m.formants.bandwidth[k]);
    }
    for (std::size_t c = 0; c < cep.size() && c < m.mfcc.size(); ++c) cep[c].push_back(m.mfcc[c]);
    ex.windows.push_back(std::move(m));
  }

  fv[Feature::intensity_std] = std_of(intensities);
  fv[Feature::f0_std] = std_of(pooled_f0);
  fv[Feature::f0_mean] = mean_of(pooled_f0);
  fv[Feature::vowel_f0_range] = mean_of(ranges);
  fv[Feature::harmonicity] = mean_of(hnr);
  fv[Feature::jitter_loc] = mean_of(jl);
  fv[Feature::jitter_ppq5] = mean_of(jp);
  fv[Feature::shimmer_loc] = mean_of(sl);
  fv[Feature::shimmer_apq5] = mean_of(sa);
  const Feature fslots[3] = {Feature::f1, Feature::f2, Feature::f3};
  const Feature bslots[3] = {Feature::b1, Feature::b2, Feature::b3};
  for (std::size_t k = 0; k < 3; ++k) {
    fv[fslots[k]] = mean_of(formant_f[k]);
    fv[bslots[k]] = mean_of(formant_b[k]);
  }
  for (std::size_t c = 0; c < cep.size() && c < 8; ++c)
    fv[static_cast<Feature>(index(Feature::cep1) + c)] = mean_of(cep[c]);
  return ex;
}

FeatureVector extract_features(const AudioClip& clip, const AnalysisParams& params) {
  return extract_features_detailed(clip, params).features;
}

namespace {
constexpr const char* kDenominatorNote =
    "# spkrate=vowel_time/speech_time; pause_speech_ratio=pause_time/speech_time; "
    "pauses_second=pauses/total_time; rhythm=vowels/total_time; speech_time=total_time-pause_time";
}

void write_feature_csv(std::ostream& out, const FeatureTable& table) {
  out << kDenominatorNote << '\n';
  out << "speaker_id,session";
  for (auto name : feature_names()) out << ',' << name;
  out << '\n';
  for (const auto& row : table.rows()) {
    out << csv::quote(row.speaker_id) << ',' << to_string(row.session);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      out << ',';
      if (const auto& v = row.features.at(i)) out << csv::format_double(*v);
    }
    out << '\n';
  }
}

FeatureTable read_feature_csv(std::istream& in) {
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!csv::next_record(in, fields, line)) throw Error(ErrorCode::Format, "feature CSV: missing header");
  if (fields.size() != kFeatureCount + 2 || csv::trim(fields[0]) != "speaker_id" || csv::trim(fields[1]) != "session")
    throw Error(ErrorCode::Format, "feature CSV: header must be speaker_id,session,<30 features>");
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (csv::trim(fields[i + 2]) != feature_names()[i])
      throw Error(ErrorCode::Format, "feature CSV: column " + std::to_string(i + 3) + " should be '" +
                                         std::string(feature_names()[i]) + "'");
  FeatureTable table;
  while (csv::next_record(in, fields, line)) {
    if (fields.size() != kFeatureCount + 2)
      throw Error(ErrorCode::Format, "feature CSV line " + std::to_string(line) + ": expected 32 fields");
    FeatureRow row;
    row.speaker_id = csv::trim(fields[0]);
    row.session = parse_session(fields[1]);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const std::string cell = csv::trim(fields[i + 2]);
      if (cell.empty()) continue;
      auto v = csv::parse_double(cell);
      if (!v) throw Error(ErrorCode::Format, "feature CSV line " + std::to_string(line) + ": bad number '" + cell + "'");
      row.features.at(i) = *v;
    }
    table.add(std::move(row));
  }
  return table;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  write_feature_csv(out, table);
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return read_feature_csv(in);
}

void write_window_csv(std::ostream& out, const FeatureExtraction& ex) {
  out << "center_s,f0_mean,f0_min,f0_max,intensity_db,jitter_loc,jitter_ppq5,shimmer_loc,shimmer_apq5,hnr,"
         "f1,f2,f3,b1,b2,b3";
  for (int c = 1; c <= 8; ++c) out << ",cep" << c;
  out << '\n';
  auto cell = [&](const std::optional<double>& v) {
    out << ',';
    if (v) out << csv::format_double(*v);
  };
  for (const auto& w : ex.windows) {
    out << csv::format_double(w.center);
    cell(w.f0_mean);
    cell(w.f0_min);
    cell(w.f0_max);
    cell(w.intensity_db);
    cell(w.perturbation.jitter_local);
    cell(w.perturbation.jitter_ppq5);
    cell(w.perturbation.shimmer_local);
    cell(w.perturbation.shimmer_apq5);
    cell(w.hnr);
    for (const auto& f : w.formants.frequency) cell(f);
    for (const auto& b : w.formants.bandwidth) cell(b);
    for (std::size_t c = 0; c < 8; ++c) cell(c < w.mfcc.size() ? std::optional<double>(w.mfcc[c]) : std::nullopt);
    out << '\n';
  }
}

}  // namespace voxcue
