#pragma once

// Published reference prediction models and scoring of standardized feature
// vectors against them.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "voxcue/features.hpp"
#include "voxcue/regression.hpp"

namespace voxcue {

inline constexpr std::array<std::string_view, 9> kReferenceDvs = {
    "cooperative", "practical_solution", "serene",   "hesitant",         "determined",
    "answered_properly", "tremulous",    "turned_face_aside", "breathed_rapidly"};

struct ReferenceTerm {
  Feature feature;
  std::string coefficient_text;  // as printed, e.g. "-.67"
  double coefficient = 0.0;
};

struct ReferenceModel {
  std::string dv;
  Session session = Session::S1;
  std::vector<ReferenceTerm> terms;
  std::string train_r_text;  // e.g. ".81"
  double train_r = 0.0;
  bool text_uncertain = false;

  bool operator==(const ReferenceModel& o) const;
};

/// All 27 models (9 DVs x 3 sessions), DV-major in kReferenceDvs order.
const std::vector<ReferenceModel>& registry();
/// Throws NotFound.
const ReferenceModel& reference_model(std::string_view dv, Session session);

struct ScoreTerm {
  Feature feature;
  double coefficient = 0.0;
  double z = 0.0;
  double product = 0.0;
};

struct ScoreReport {
  std::string dv;
  Session session = Session::S1;
  double score = 0.0;  // standardized units
  std::vector<ScoreTerm> terms;
  bool text_uncertain = false;
};

/// score = sum of coefficient * z over the model's predictors. Throws
/// InvalidArgument naming the first predictor without a z value.
ScoreReport score(const ReferenceModel& model, const FeatureVector& z);

using ReferenceStats = std::array<std::optional<Standardization>, kFeatureCount>;

/// z = (x - mean) / std for every feature in `needed` (default: every feature
/// present in x). A needed feature without a reference entry throws NotFound;
/// one with std <= 0 throws Degenerate. Absent x values stay absent.
FeatureVector standardize_against(const FeatureVector& x, const ReferenceStats& stats,
                                  const std::vector<Feature>& needed = {});
/// Sample mean/std of every feature with at least two distinct present values.
ReferenceStats reference_stats(const FeatureTable& table);

/// Statistics CSV: feature,mean,std
void write_reference_stats(std::ostream& out, const ReferenceStats& stats);
ReferenceStats read_reference_stats(std::istream& in);
ReferenceStats read_reference_stats(const std::filesystem::path& path);

/// A reference model in the model file layout. Inputs are already z-scores,
/// so every standardization entry is (0, 1).
RegressionModel to_regression_model(const ReferenceModel& m);

/// Registry as a JSON array of model trees, with the printed coefficient
/// strings and the text_uncertain flag alongside the usual fields.
std::string registry_to_json(const std::vector<ReferenceModel>& models);
std::vector<ReferenceModel> registry_from_json(const std::string& text);

}  // namespace voxcue
