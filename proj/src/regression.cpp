#include "voxcue/regression.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>

#include "voxcue/csv.hpp"
#include "voxcue/error.hpp"
#include "voxcue/numeric.hpp"

namespace voxcue {

std::string_view to_string(RaterType r) { return r == RaterType::P ? "P" : "SA"; }

RaterType parse_rater(std::string_view s) {
  const auto t = csv::trim(s);
  if (t == "P" || t == "p") return RaterType::P;
  if (t == "SA" || t == "sa") return RaterType::SA;
  throw Error(ErrorCode::Format, "unknown rater type '" + t + "' (expected P or SA)");
}

void RatingTable::add(const std::string& speaker, const std::string& dv, RaterType rater, int rating) {
  if (rating < 1 || rating > 7)
    throw Error(ErrorCode::InvalidArgument, "rating " + std::to_string(rating) + " outside 1..7 for " + speaker);
  auto key = std::make_tuple(speaker, dv, static_cast<int>(rater));
  if (ratings_.count(key))
    throw Error(ErrorCode::DuplicateKey,
                "duplicate rating (" + speaker + ", " + dv + ", " + std::string(to_string(rater)) + ")");
  ratings_.emplace(std::move(key), rating);
}

std::optional<int> RatingTable::get(std::string_view speaker, std::string_view dv, RaterType rater) const {
  auto it = ratings_.find(std::make_tuple(std::string(speaker), std::string(dv), static_cast<int>(rater)));
  if (it == ratings_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> RatingTable::dvs() const {
  std::set<std::string> names;
  for (const auto& [key, value] : ratings_) names.insert(std::get<1>(key));
  return {names.begin(), names.end()};
}

void write_ratings_csv(std::ostream& out, const RatingTable& table) {
  out << "speaker_id,dv,rater_type,rating\n";
  for (const auto& [key, rating] : table.entries())
    out << csv::quote(std::get<0>(key)) << ',' << csv::quote(std::get<1>(key)) << ','
        << to_string(static_cast<RaterType>(std::get<2>(key))) << ',' << rating << '\n';
}

RatingTable read_ratings_csv(std::istream& in) {
  std::vector<std::string> f;
  std::size_t line = 0;
  if (!csv::next_record(in, f, line) || f.size() != 4 || csv::trim(f[0]) != "speaker_id")
    throw Error(ErrorCode::Format, "ratings CSV: header must be speaker_id,dv,rater_type,rating");
  RatingTable t;
  while (csv::next_record(in, f, line)) {
    if (f.size() != 4) throw Error(ErrorCode::Format, "ratings CSV line " + std::to_string(line) + ": expected 4 fields");
    const auto v = csv::parse_double(f[3]);
    if (!v || *v != std::floor(*v))
      throw Error(ErrorCode::Format, "ratings CSV line " + std::to_string(line) + ": rating must be an integer");
    t.add(csv::trim(f[0]), csv::trim(f[1]), parse_rater(f[2]), static_cast<int>(*v));
  }
  return t;
}

RatingTable read_ratings_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return read_ratings_csv(in);
}

Standardization zscore_fit(std::span<const double> column) {
  if (column.size() < 2) throw Error(ErrorCode::Degenerate, "standardization needs at least two values");
  const double m = mean(column);
  const double s = sample_std(column);
  const bool distinct = std::any_of(column.begin(), column.end(), [&](double v) { return v != column[0]; });
  if (!distinct || !(s > 0.0)) throw Error(ErrorCode::Degenerate, "constant column cannot be standardized");
  return {m, s};
}

std::vector<double> zscore_apply(std::span<const double> column, const Standardization& s) {
  std::vector<double> out(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) out[i] = (column[i] - s.mean) / s.std;
  return out;
}

namespace {

double partial_f_p(double f, double df) {
  if (!(f > 0.0)) return 1.0;
  if (!std::isfinite(f)) return 0.0;
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::sqrt(f))));
}

// Orthonormal basis of the selected columns plus the current y residual.
struct Projection {
  Eigen::MatrixXd Q;
  Eigen::VectorXd residual;
  double rss = 0.0;
};

Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& Q, Eigen::VectorXd v) {
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index c = 0; c < Q.cols(); ++c) v -= Q.col(c).dot(v) * Q.col(c);
  return v;
}

Projection project(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::size_t>& cols) {
  Projection p;
  p.Q.resize(X.rows(), 0);
  for (auto c : cols) {
    Eigen::VectorXd v = orthogonalize(p.Q, X.col(static_cast<Eigen::Index>(c)));
    const double norm = v.norm();
    if (norm <= 1e-12) continue;
    p.Q.conservativeResize(Eigen::NoChange, p.Q.cols() + 1);
    p.Q.col(p.Q.cols() - 1) = v / norm;
  }
  p.residual = orthogonalize(p.Q, y);
  p.rss = p.residual.squaredNorm();
  return p;
}

}  // namespace

Eigen::VectorXd ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::size_t>& columns) {
  Eigen::MatrixXd A(X.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) A.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(columns[j]));
  if (columns.empty()) return Eigen::VectorXd(0);
  return A.colPivHouseholderQr().solve(y);
}

StepwiseFit stepwise_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const StepwiseConfig& config,
                         const std::vector<bool>& eligible) {
  const auto n = static_cast<double>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  const double perfect = 1e-20 * std::max(1.0, y.squaredNorm());

  StepwiseFit fit;
  std::vector<std::size_t> sel;
  std::set<std::vector<std::size_t>> visited{sel};
  Projection proj = project(X, y, sel);

  const std::size_t max_steps = 4 * p + 4;
  while (fit.steps < max_steps) {
    ++fit.steps;
    if (proj.rss <= perfect) break;

    const double k_new = static_cast<double>(sel.size() + 1);
    const double df = n - k_new - 1.0;
    if (df < 1.0) break;
    // Forward: the candidate with the largest partial F (all share df). Values
    // equal to 1e-9 relative count as ties and go to the lower index.
    double best_f = -1.0, best_p = 1.0;
    std::size_t best = p;
    for (std::size_t j = 0; j < p; ++j) {
      if (!eligible.empty() && !eligible[j]) continue;
      if (std::find(sel.begin(), sel.end(), j) != sel.end()) continue;
      const auto col = X.col(static_cast<Eigen::Index>(j));
      const Eigen::VectorXd v = orthogonalize(proj.Q, col);
      const double ss = v.squaredNorm();
      if (ss <= 1e-10 * std::max(col.squaredNorm(), 1e-300)) continue;  // collinear with the current set
      const double proj_y = v.dot(proj.residual);
      const double gain = proj_y * proj_y / ss;
      const double rss_new = std::max(proj.rss - gain, 0.0);
      const double f = rss_new <= perfect ? std::numeric_limits<double>::infinity() : gain / (rss_new / df);
      if (best == p || f > best_f * (1.0 + 1e-9)) {
        best_f = f;
        best = j;
      }
    }
    if (best != p) best_p = std::isinf(best_f) ? 0.0 : partial_f_p(best_f, df);
    if (best == p || !(best_p < config.enter_p)) break;
    sel.push_back(best);
    proj = project(X, y, sel);

    // Backward: drop the weakest term while its p exceeds remove_p.
    while (sel.size() > 1) {
      const double df_full = n - static_cast<double>(sel.size()) - 1.0;
      double worst_p = -1.0;
      std::size_t worst = 0;
      for (std::size_t s = 0; s < sel.size(); ++s) {
        std::vector<std::size_t> reduced = sel;
        reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(s));
        const double rss_reduced = project(X, y, reduced).rss;
        double pval;
        if (proj.rss <= perfect) pval = rss_reduced <= perfect ? 1.0 : 0.0;
        else pval = partial_f_p((rss_reduced - proj.rss) / (proj.rss / df_full), df_full);
        if (pval > worst_p) {
          worst_p = pval;
          worst = s;
        }
      }
      if (!(worst_p > config.remove_p)) break;
      sel.erase(sel.begin() + static_cast<std::ptrdiff_t>(worst));
      proj = project(X, y, sel);
    }

    std::vector<std::size_t> key = sel;
    std::sort(key.begin(), key.end());
    if (!visited.insert(key).second) break;
  }

  fit.selected = sel;
  if (!sel.empty()) {
    const Eigen::VectorXd b = ols(X, y, sel);
    fit.betas.assign(b.data(), b.data() + b.size());
    Eigen::VectorXd fitted = Eigen::VectorXd::Zero(X.rows());
    for (std::size_t j = 0; j < sel.size(); ++j) fitted += b(static_cast<Eigen::Index>(j)) * X.col(static_cast<Eigen::Index>(sel[j]));
    fit.r = pearson(std::span<const double>(fitted.data(), static_cast<std::size_t>(fitted.size())),
                    std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
  }
  return fit;
}

bool is_stable(double fraction_identical, double r_loocv, double r_overall, const StabilityThresholds& t) {
  if (!(fraction_identical >= t.min_identical_fraction)) return false;
  if (!(r_overall > 0.0)) return false;
  return r_loocv / r_overall > t.min_r_ratio;
}

std::optional<double> RegressionModel::predict(const FeatureVector& x) const {
  double z = 0.0;
  for (const auto& p : predictors) {
    const auto f = feature_from_name(p.name);
    if (!f) return std::nullopt;
    const auto& v = x[*f];
    if (!v) return std::nullopt;
    const auto it = standardization.find(p.name);
    if (it == standardization.end()) return std::nullopt;
    z += p.beta * (*v - it->second.mean) / it->second.std;
  }
  return dv_standardization.mean + dv_standardization.std * z;
}

double RegressionModel::raw_coefficient(const Predictor& p) const {
  const auto it = standardization.find(p.name);
  if (it == standardization.end()) throw Error(ErrorCode::NotFound, "no standardization for " + p.name);
  return p.beta * dv_standardization.std / it->second.std;
}

Design build_design(const FeatureTable& table, const RatingTable& ratings, const std::string& dv, Session session,
                    RaterType rater, const StepwiseConfig& config) {
  std::vector<const FeatureRow*> rows;
  std::vector<double> y;
  Design d;
  for (const auto& row : table.rows()) {
    if (row.session != session) continue;
    const auto r = ratings.get(row.speaker_id, dv, rater);
    if (!r) continue;
    rows.push_back(&row);
    y.push_back(*r);
  }
  std::vector<Feature> kept;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::size_t absent = 0;
    for (const auto* r : rows)
      if (!r->features.at(f)) ++absent;
    if (rows.empty() || static_cast<double>(absent) > config.max_absent_fraction * static_cast<double>(rows.size())) continue;
    kept.push_back(static_cast<Feature>(f));
  }
  std::vector<std::size_t> complete;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool ok = std::all_of(kept.begin(), kept.end(), [&](Feature f) { return rows[i]->features[f].has_value(); });
    if (ok) complete.push_back(i);
  }
  // Constant columns carry no information and cannot be standardized.
  for (Feature f : kept) {
    bool varies = false;
    for (std::size_t i : complete)
      if (*rows[i]->features[f] != *rows[complete.front()]->features[f]) varies = true;
    if (varies) d.columns.push_back(f);
  }
  d.X.resize(static_cast<Eigen::Index>(complete.size()), static_cast<Eigen::Index>(d.columns.size()));
  d.y.resize(static_cast<Eigen::Index>(complete.size()));
  for (std::size_t r = 0; r < complete.size(); ++r) {
    const auto* row = rows[complete[r]];
    d.speakers.push_back(row->speaker_id);
    d.y(static_cast<Eigen::Index>(r)) = y[complete[r]];
    for (std::size_t c = 0; c < d.columns.size(); ++c)
      d.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *row->features[d.columns[c]];
  }
  return d;
}

namespace {

std::span<const double> col_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

struct Standardized {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<Standardization> x_stats;
  std::vector<bool> eligible;
  Standardization y_stats;
  bool y_ok = true;
};

Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Standardized s;
  s.X = X;
  s.x_stats.resize(static_cast<std::size_t>(X.cols()));
  s.eligible.assign(static_cast<std::size_t>(X.cols()), true);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const Eigen::VectorXd col = X.col(c);
    try {
      const auto st = zscore_fit(col_span(col));
      s.x_stats[static_cast<std::size_t>(c)] = st;
      s.X.col(c) = (col.array() - st.mean) / st.std;
    } catch (const Error&) {
      s.eligible[static_cast<std::size_t>(c)] = false;
      s.X.col(c).setZero();
    }
  }
  try {
    s.y_stats = zscore_fit(col_span(y));
    s.y = (y.array() - s.y_stats.mean) / s.y_stats.std;
  } catch (const Error&) {
    s.y_ok = false;
    s.y = Eigen::VectorXd::Zero(y.size());
  }
  return s;
}

}  // namespace

RegressionModel fit_model(const Design& design, const std::string& dv, Session session, RaterType rater,
                          const StepwiseConfig& config) {
  const auto s = standardize(design.X, design.y);
  if (!s.y_ok) throw Error(ErrorCode::Degenerate, "ratings for '" + dv + "' are constant");
  const auto fit = stepwise_fit(s.X, s.y, config, s.eligible);
  RegressionModel m;
  m.dv = dv;
  m.session = session;
  m.rater_type = rater;
  m.stepwise = config;
  m.n_train = static_cast<std::size_t>(design.X.rows());
  m.train_r = fit.r;
  m.dv_standardization = s.y_stats;
  for (std::size_t c = 0; c < design.columns.size(); ++c)
    if (s.eligible[c]) m.standardization[std::string(feature_name(design.columns[c]))] = s.x_stats[c];
  for (std::size_t j = 0; j < fit.selected.size(); ++j)
    m.predictors.push_back({std::string(feature_name(design.columns[fit.selected[j]])), fit.betas[j]});
  return m;
}

StabilityReport loocv_stability(const Design& design, const RegressionModel& overall,
                                const StabilityThresholds& thresholds) {
  const auto n = static_cast<std::size_t>(design.X.rows());
  if (n < 3) throw Error(ErrorCode::InsufficientData, "leave-one-out needs at least three rows");

  std::set<std::string> overall_set;
  for (const auto& p : overall.predictors) overall_set.insert(p.name);

  StabilityReport rep;
  rep.folds = n;
  std::size_t identical = 0;
  std::vector<double> predicted, truth;
  for (std::size_t hold = 0; hold < n; ++hold) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n - 1), design.X.cols());
    Eigen::VectorXd y(static_cast<Eigen::Index>(n - 1));
    for (std::size_t i = 0, r = 0; i < n; ++i) {
      if (i == hold) continue;
      X.row(static_cast<Eigen::Index>(r)) = design.X.row(static_cast<Eigen::Index>(i));
      y(static_cast<Eigen::Index>(r)) = design.y(static_cast<Eigen::Index>(i));
      ++r;
    }
    const auto s = standardize(X, y);
    if (!s.y_ok) continue;  // degenerate fold: non-identical, no prediction
    const auto fit = stepwise_fit(s.X, s.y, overall.stepwise, s.eligible);

    std::set<std::string> fold_set;
    for (auto c : fit.selected) fold_set.insert(std::string(feature_name(design.columns[c])));
    if (fold_set == overall_set) ++identical;

    double z = 0.0;
    for (std::size_t j = 0; j < fit.selected.size(); ++j) {
      const auto c = fit.selected[j];
      const auto& st = s.x_stats[c];
      z += fit.betas[j] * (design.X(static_cast<Eigen::Index>(hold), static_cast<Eigen::Index>(c)) - st.mean) / st.std;
    }
    predicted.push_back(s.y_stats.mean + s.y_stats.std * z);
    truth.push_back(design.y(static_cast<Eigen::Index>(hold)));
  }
  rep.fraction_identical = static_cast<double>(identical) / static_cast<double>(n);
  rep.r_loocv = predicted.size() >= 3 ? pearson(predicted, truth) : 0.0;
  rep.r_overall = overall.train_r;
  rep.stable = is_stable(rep.fraction_identical, rep.r_loocv, rep.r_overall, thresholds);
  return rep;
}

RegressionModel train_model(const FeatureTable& table, const RatingTable& ratings, const std::string& dv,
                            Session session, RaterType rater, const StepwiseConfig& config,
                            const StabilityThresholds& thresholds) {
  if (rater != RaterType::P)
    throw Error(ErrorCode::InvalidArgument, "training on self-assessed (SA) ratings is not supported");
  const auto design = build_design(table, ratings, dv, session, rater, config);
  if (design.X.rows() < 4)
    throw Error(ErrorCode::InsufficientData, "only " + std::to_string(design.X.rows()) + " complete rows for '" + dv +
                                                 "' in " + std::string(to_string(session)));
  auto model = fit_model(design, dv, session, rater, config);
  model.thresholds = thresholds;
  model.stability = loocv_stability(design, model, thresholds);
  return model;
}

Evaluation cross_session_eval(const RegressionModel& model, const FeatureTable& table, const RatingTable& ratings,
                              Session session, RaterType rater) {
  std::vector<double> pred, truth;
  for (const auto& row : table.rows()) {
    if (row.session != session) continue;
    const auto r = ratings.get(row.speaker_id, model.dv, rater);
    if (!r) continue;
    const auto p = model.predict(row.features);
    if (!p) continue;
    pred.push_back(*p);
    truth.push_back(*r);
  }
  if (pred.size() < 3)
    throw Error(ErrorCode::InsufficientData, "fewer than three speakers overlap in " + std::string(to_string(session)));
  return {pearson(pred, truth), pred.size()};
}

using nlohmann::json;

std::string model_to_json(const RegressionModel& m) {
  json j;
  j["format"] = "voxcue-model/1";
  j["dv"] = m.dv;
  j["session"] = std::string(to_string(m.session));
  j["rater_type"] = std::string(to_string(m.rater_type));
  j["coefficients"] = "standardized beta";
  j["predictors"] = json::array();
  for (const auto& p : m.predictors) j["predictors"].push_back({{"name", p.name}, {"beta", p.beta}});
  j["train_r"] = m.train_r;
  j["n_train"] = m.n_train;
  j["standardization"] = json::object();
  for (const auto& [name, s] : m.standardization) j["standardization"][name] = {{"mean", s.mean}, {"std", s.std}};
  j["dv_standardization"] = {{"mean", m.dv_standardization.mean}, {"std", m.dv_standardization.std}};
  if (m.stability) {
    const auto& s = *m.stability;
    j["stability"] = {{"folds", s.folds},
                      {"fraction_identical", s.fraction_identical},
                      {"r_loocv", s.r_loocv},
                      {"r_overall", s.r_overall},
                      {"stable", s.stable}};
  } else {
    j["stability"] = nullptr;
  }
  j["thresholds"] = {{"enter_p", m.stepwise.enter_p},
                     {"remove_p", m.stepwise.remove_p},
                     {"max_absent_fraction", m.stepwise.max_absent_fraction},
                     {"min_identical_fraction", m.thresholds.min_identical_fraction},
                     {"min_r_ratio", m.thresholds.min_r_ratio}};
  return j.dump(2);
}

RegressionModel model_from_json(const std::string& text) {
  RegressionModel m;
  try {
    const json j = json::parse(text);
    m.dv = j.at("dv").get<std::string>();
    m.session = parse_session(j.at("session").get<std::string>());
    m.rater_type = parse_rater(j.at("rater_type").get<std::string>());
    for (const auto& p : j.at("predictors")) m.predictors.push_back({p.at("name").get<std::string>(), p.at("beta").get<double>()});
    m.train_r = j.at("train_r").get<double>();
    m.n_train = j.value("n_train", std::size_t{0});
    for (const auto& [name, s] : j.at("standardization").items())
      m.standardization[name] = {s.at("mean").get<double>(), s.at("std").get<double>()};
    if (j.contains("dv_standardization")) {
      const auto& s = j["dv_standardization"];
      m.dv_standardization = {s.at("mean").get<double>(), s.at("std").get<double>()};
    }
    if (j.contains("stability") && !j["stability"].is_null()) {
      const auto& s = j["stability"];
      m.stability = StabilityReport{s.value("folds", std::size_t{0}), s.at("fraction_identical").get<double>(),
                                    s.at("r_loocv").get<double>(), s.at("r_overall").get<double>(),
                                    s.at("stable").get<bool>()};
    }
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      m.stepwise.enter_p = t.value("enter_p", m.stepwise.enter_p);
      m.stepwise.remove_p = t.value("remove_p", m.stepwise.remove_p);
      m.stepwise.max_absent_fraction = t.value("max_absent_fraction", m.stepwise.max_absent_fraction);
      m.thresholds.min_identical_fraction = t.value("min_identical_fraction", m.thresholds.min_identical_fraction);
      m.thresholds.min_r_ratio = t.value("min_r_ratio", m.thresholds.min_r_ratio);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("model file: ") + e.what());
  }
  for (const auto& p : m.predictors) {
    if (!feature_from_name(p.name)) throw Error(ErrorCode::Format, "model file: unknown predictor '" + p.name + "'");
    const auto it = m.standardization.find(p.name);
    if (it == m.standardization.end() || !(it->second.std > 0.0))
      throw Error(ErrorCode::Format, "model file: predictor '" + p.name + "' lacks a positive std");
  }
  return m;
}

void write_model(const std::filesystem::path& path, const RegressionModel& model) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << model_to_json(model) << '\n';
}

RegressionModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace voxcue
