#pragma once

// Recording-level descriptors and multi-recording feature tables.

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "voxcue/acoustics.hpp"
#include "voxcue/audio.hpp"
#include "voxcue/segmentation.hpp"

namespace voxcue {

inline constexpr std::size_t kFeatureCount = 30;

// Column order of every feature table.
enum class Feature : std::size_t {
  spkrate, mean_pause, pauses_second, pause_speech_ratio, rhythm, vowel_mean, vowel_std,
  intensity_std, f0_std, f0_mean, vowel_f0_range,
  harmonicity, jitter_loc, jitter_ppq5, shimmer_loc, shimmer_apq5,
  f1, f2, f3, b1, b2, b3,
  cep1, cep2, cep3, cep4, cep5, cep6, cep7, cep8,
};

const std::array<std::string_view, kFeatureCount>& feature_names();
std::string_view feature_name(Feature f);
std::optional<Feature> feature_from_name(std::string_view name);
constexpr std::size_t index(Feature f) { return static_cast<std::size_t>(f); }

/// The 30 descriptors of one recording. Missing measures are absent, never zero.
class FeatureVector {
public:
  std::optional<double>& operator[](Feature f) { return values_[index(f)]; }
  const std::optional<double>& operator[](Feature f) const { return values_[index(f)]; }
  std::optional<double>& at(std::size_t i) { return values_.at(i); }
  const std::optional<double>& at(std::size_t i) const { return values_.at(i); }
  std::size_t present_count() const;
  bool operator==(const FeatureVector&) const = default;

private:
  std::array<std::optional<double>, kFeatureCount> values_{};
};

enum class Session { S1 = 1, S2 = 2, S3 = 3 };
std::string_view to_string(Session s);
/// Accepts "S1".."S3" (case-insensitive) or "1".."3".
Session parse_session(std::string_view s);

struct FeatureRow {
  std::string speaker_id;
  Session session = Session::S1;
  FeatureVector features;
};

/// Rows keyed by (speaker, session), kept in insertion order.
class FeatureTable {
public:
  /// Throws Error(DuplicateKey) naming the key.
  void add(FeatureRow row);
  const std::vector<FeatureRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const FeatureRow* find(std::string_view speaker, Session session) const;
  /// Distinct speaker ids in first-seen order.
  std::vector<std::string> speakers() const;

private:
  std::vector<FeatureRow> rows_;
  std::map<std::pair<std::string, int>, std::size_t> index_;
};

FeatureTable build_table(std::vector<FeatureRow> rows);

struct AnalysisParams {
  SegmentationParams segmentation;
  PitchParams pitch;
  FormantParams formants;
  MfccConfig mfcc;
  double prosody_window = 0.080;   // s, F0 / intensity / voice quality
  double spectral_window = 0.040;  // s, formants / MFCC
};

/// Measures taken around one stressed vowel.
struct VowelWindowMeasures {
  double center = 0.0;
  std::vector<double> f0;  // voiced subframes only
  double intensity_db = 0.0;
  std::optional<double> f0_mean, f0_min, f0_max;
  Perturbation perturbation;
  std::optional<double> hnr;
  Formants formants;
  std::vector<double> mfcc;
};

struct FeatureExtraction {
  FeatureVector features;
  SegmentationResult segmentation;
  std::vector<VowelWindowMeasures> windows;
};

/// The duration and rate descriptors; every other slot is left absent.
FeatureVector temporal_features(const SegmentationResult& seg);

FeatureExtraction extract_features_detailed(const AudioClip& clip, const AnalysisParams& params = {});
FeatureVector extract_features(const AudioClip& clip, const AnalysisParams& params = {});

/// Samples of `length` seconds centred on `center`, shifted to stay inside the clip.
std::span<const double> window_around(const AudioClip& clip, double center, double length);

/// Feature CSV: a '#' comment line stating the rate denominators, then
/// speaker_id,session,<30 feature names>; absent values are empty cells.
void write_feature_csv(std::ostream& out, const FeatureTable& table);
FeatureTable read_feature_csv(std::istream& in);
void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_feature_csv(const std::filesystem::path& path);

/// Per-window debug dump for one recording.
void write_window_csv(std::ostream& out, const FeatureExtraction& extraction);

}  // namespace voxcue
