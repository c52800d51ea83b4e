#pragma once

// Stepwise multilinear regression from feature tables to questionnaire
// ratings, leave-one-out stability gating and cross-session evaluation.

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "voxcue/features.hpp"

namespace voxcue {

enum class RaterType { P, SA };
std::string_view to_string(RaterType r);
RaterType parse_rater(std::string_view s);

/// Integer 1..7 ratings keyed by (speaker, dv, rater type).
class RatingTable {
public:
  /// Throws InvalidArgument for ratings outside 1..7, DuplicateKey for a repeated triple.
  void add(const std::string& speaker, const std::string& dv, RaterType rater, int rating);
  std::optional<int> get(std::string_view speaker, std::string_view dv, RaterType rater) const;
  std::vector<std::string> dvs() const;
  std::size_t size() const noexcept { return ratings_.size(); }
  const std::map<std::tuple<std::string, std::string, int>, int>& entries() const noexcept { return ratings_; }

private:
  std::map<std::tuple<std::string, std::string, int>, int> ratings_;
};

/// Ratings CSV: speaker_id,dv,rater_type,rating
void write_ratings_csv(std::ostream& out, const RatingTable& table);
RatingTable read_ratings_csv(std::istream& in);
RatingTable read_ratings_csv(const std::filesystem::path& path);

struct Standardization {
  double mean = 0.0;
  double std = 1.0;
};

/// Mean and sample standard deviation; throws Degenerate for a column
/// without two distinct values.
Standardization zscore_fit(std::span<const double> column);
std::vector<double> zscore_apply(std::span<const double> column, const Standardization& s);

struct StepwiseConfig {
  double enter_p = 0.05;
  double remove_p = 0.10;
  double max_absent_fraction = 0.10;  // predictor excluded above this
};

struct StabilityThresholds {
  double min_identical_fraction = 0.75;  // inclusive
  double min_r_ratio = 0.75;             // exclusive
};

struct StepwiseFit {
  std::vector<std::size_t> selected;  // column indices in entry order
  std::vector<double> betas;          // matching `selected`
  double r = 0.0;                     // Pearson(fitted, y)
  std::size_t steps = 0;
};

/// Forward entry on the partial F-test (p < enter_p) with backward removal
/// (p > remove_p) after each entry, then OLS on the final set. X and y are
/// expected standardized; no intercept is fitted. Columns collinear with the
/// current set are skipped. `eligible` masks columns out when provided.
StepwiseFit stepwise_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const StepwiseConfig& config = {},
                         const std::vector<bool>& eligible = {});

/// Least squares on the given columns (no intercept).
Eigen::VectorXd ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::size_t>& columns);

struct StabilityReport {
  std::size_t folds = 0;
  double fraction_identical = 0.0;
  double r_loocv = 0.0;
  double r_overall = 0.0;
  bool stable = false;
};

bool is_stable(double fraction_identical, double r_loocv, double r_overall, const StabilityThresholds& t = {});

struct Predictor {
  std::string name;
  double beta = 0.0;  // standardized coefficient
};

struct RegressionModel {
  std::string dv;
  Session session = Session::S1;
  RaterType rater_type = RaterType::P;
  std::vector<Predictor> predictors;
  double train_r = 0.0;
  std::size_t n_train = 0;
  std::map<std::string, Standardization> standardization;  // every candidate feature
  Standardization dv_standardization;
  StepwiseConfig stepwise;
  StabilityThresholds thresholds;
  std::optional<StabilityReport> stability;

  /// Prediction on the rating scale; nullopt if a predictor value is absent.
  std::optional<double> predict(const FeatureVector& x) const;
  /// Coefficient per raw feature unit: beta * dv_std / feature_std.
  double raw_coefficient(const Predictor& p) const;
};

/// Rows of a design built from feature and rating tables (listwise deletion).
struct Design {
  std::vector<std::string> speakers;
  std::vector<Feature> columns;  // features surviving the absent-value rule
  Eigen::MatrixXd X;             // raw values
  Eigen::VectorXd y;             // raw ratings
};

/// Joins the session rows of `table` with `dv` ratings of `rater`, drops
/// predictors absent in more than max_absent_fraction of rows and constant
/// predictors, then drops rows with any remaining absent cell.
Design build_design(const FeatureTable& table, const RatingTable& ratings, const std::string& dv, Session session,
                    RaterType rater, const StepwiseConfig& config = {});

/// Standardizes and fits the overall model on a design.
RegressionModel fit_model(const Design& design, const std::string& dv, Session session, RaterType rater,
                          const StepwiseConfig& config = {});

/// Refits on every leave-one-out fold and applies the two-threshold rule.
StabilityReport loocv_stability(const Design& design, const RegressionModel& overall,
                                const StabilityThresholds& thresholds = {});

/// build_design + fit_model + loocv_stability. Throws InvalidArgument for SA
/// training and InsufficientData when fewer than 4 usable rows remain.
RegressionModel train_model(const FeatureTable& table, const RatingTable& ratings, const std::string& dv,
                            Session session, RaterType rater = RaterType::P, const StepwiseConfig& config = {},
                            const StabilityThresholds& thresholds = {});

struct Evaluation {
  double r = 0.0;
  std::size_t n = 0;
};

/// Applies the model's own standardization to the test session and correlates
/// predictions with the requested ratings. Throws InsufficientData below 3 speakers.
Evaluation cross_session_eval(const RegressionModel& model, const FeatureTable& table, const RatingTable& ratings,
                              Session session, RaterType rater);

/// Model file (JSON).
std::string model_to_json(const RegressionModel& model);
RegressionModel model_from_json(const std::string& text);
void write_model(const std::filesystem::path& path, const RegressionModel& model);
RegressionModel read_model(const std::filesystem::path& path);

}  // namespace voxcue
