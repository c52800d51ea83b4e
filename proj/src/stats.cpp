#include "voxcue/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "voxcue/csv.hpp"
#include "voxcue/error.hpp"
#include "voxcue/numeric.hpp"

namespace voxcue {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::up: return "up";
    case Direction::down: return "down";
    case Direction::none: return "none";
  }
  return "none";
}
std::string_view to_string(TestKind t) { return t == TestKind::t ? "t" : "W"; }
std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::p01: return "p01";
    case Tier::p05: return "p05";
    case Tier::none: return "none";
  }
  return "none";
}
std::string_view to_string(Transition t) {
  switch (t) {
    case Transition::s1_s2: return "1->2";
    case Transition::s1_s3: return "1->3";
    case Transition::s2_s3: return "2->3";
  }
  return "?";
}

Direction parse_direction(std::string_view s) {
  const auto t = csv::trim(s);
  if (t == "up") return Direction::up;
  if (t == "down") return Direction::down;
  if (t == "none" || t.empty()) return Direction::none;
  throw Error(ErrorCode::Format, "unknown direction '" + t + "'");
}
TestKind parse_test(std::string_view s) {
  const auto t = csv::trim(s);
  if (t == "t") return TestKind::t;
  if (t == "W" || t == "w") return TestKind::W;
  throw Error(ErrorCode::Format, "unknown test '" + t + "'");
}
Tier parse_tier(std::string_view s) {
  const auto t = csv::trim(s);
  if (t == "p01") return Tier::p01;
  if (t == "p05") return Tier::p05;
  if (t == "none" || t.empty()) return Tier::none;
  throw Error(ErrorCode::Format, "unknown tier '" + t + "'");
}
Transition parse_transition(std::string_view s) {
  const auto t = csv::trim(s);
  if (t == "1->2") return Transition::s1_s2;
  if (t == "1->3") return Transition::s1_s3;
  if (t == "2->3") return Transition::s2_s3;
  throw Error(ErrorCode::Format, "unknown transition '" + t + "'");
}

std::pair<Session, Session> sessions_of(Transition t) {
  switch (t) {
    case Transition::s1_s2: return {Session::S1, Session::S2};
    case Transition::s1_s3: return {Session::S1, Session::S3};
    case Transition::s2_s3: return {Session::S2, Session::S3};
  }
  return {Session::S1, Session::S2};
}

namespace {

std::vector<double> differences(std::span<const std::optional<double>> a, std::span<const std::optional<double>> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "paired samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && b[i]) d.push_back(*b[i] - *a[i]);
  return d;
}

std::vector<std::optional<double>> wrap(std::span<const double> x) { return {x.begin(), x.end()}; }

Direction sign_direction(double v) {
  if (v > 0.0) return Direction::up;
  if (v < 0.0) return Direction::down;
  return Direction::none;
}

double t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

}  // namespace

PairedTestResult paired_t_test(std::span<const std::optional<double>> a, std::span<const std::optional<double>> b,
                               double alpha) {
  const auto d = differences(a, b);
  if (d.size() < 2) throw Error(ErrorCode::InsufficientData, "paired t-test needs at least two complete pairs");
  const double m = mean(d);
  const double sd = sample_std(d);
  if (!(sd > 1e-15 * std::max(1.0, std::abs(m))))
    throw Error(ErrorCode::Degenerate, "paired differences have zero variance");
  PairedTestResult r;
  r.n_pairs = d.size();
  r.mean_difference = m;
  r.statistic = m / (sd / std::sqrt(static_cast<double>(d.size())));
  r.p_value = t_two_sided_p(r.statistic, static_cast<double>(d.size() - 1));
  r.direction = r.p_value < alpha ? sign_direction(m) : Direction::none;
  return r;
}

PairedTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
  const auto wa = wrap(a), wb = wrap(b);
  return paired_t_test(wa, wb, alpha);
}

double wilcoxon_exact_p(std::span<const std::uint32_t> doubled_ranks, std::uint64_t doubled_w_plus) {
  const std::size_t n = doubled_ranks.size();
  if (n == 0 || n > 62) throw Error(ErrorCode::InvalidArgument, "exact signed-rank p needs 1..62 ranks");
  std::uint64_t total = 0;
  for (auto r : doubled_ranks) total += r;
  // counts[s] = number of sign assignments whose positive doubled-rank sum is s.
  std::vector<std::uint64_t> counts(total + 1, 0);
  counts[0] = 1;
  std::uint64_t reach = 0;
  for (auto r : doubled_ranks) {
    for (std::uint64_t s = reach + 1; s-- > 0;)
      if (counts[s]) counts[s + r] += counts[s];
    reach += r;
  }
  std::uint64_t lower = 0, upper = 0;
  for (std::uint64_t s = 0; s <= total; ++s) {
    if (s <= doubled_w_plus) lower += counts[s];
    if (s >= doubled_w_plus) upper += counts[s];
  }
  const double assignments = std::ldexp(1.0, static_cast<int>(n));
  return std::min(1.0, 2.0 * static_cast<double>(std::min(lower, upper)) / assignments);
}

PairedTestResult wilcoxon_signed_rank(std::span<const std::optional<double>> a,
                                      std::span<const std::optional<double>> b, double alpha) {
  auto all = differences(a, b);
  std::vector<double> d;
  for (double v : all)
    if (v != 0.0) d.push_back(v);
  if (d.empty()) throw Error(ErrorCode::Degenerate, "all paired differences are zero");

  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });

  // Doubled average ranks: a tie block occupying positions i..j (1-based) gets i + j.
  std::vector<std::uint32_t> doubled(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const auto rank2 = static_cast<std::uint32_t>((i + 1) + (j + 1));
    for (std::size_t k = i; k <= j; ++k) doubled[order[k]] = rank2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  std::uint64_t w2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0.0) w2 += doubled[i];

  PairedTestResult r;
  r.n_pairs = n;
  r.statistic = static_cast<double>(w2) / 2.0;
  r.mean_difference = mean(all);
  if (n <= kExactWilcoxonMax) {
    r.p_value = wilcoxon_exact_p(doubled, w2);
  } else {
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(r.statistic - mu) - 0.5) / std::sqrt(var);
    r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  }
  r.direction = r.p_value < alpha ? sign_direction(r.mean_difference) : Direction::none;
  return r;
}

PairedTestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha) {
  const auto wa = wrap(a), wb = wrap(b);
  return wilcoxon_signed_rank(wa, wb, alpha);
}

Tier tier_of(double p) {
  if (p < 0.01) return Tier::p01;
  if (p < 0.05) return Tier::p05;
  return Tier::none;
}

std::optional<SignificanceCell>& SignificanceMatrix::cell(Feature f, Transition tr, TestKind test) {
  return cells_[index(f)][static_cast<std::size_t>(tr)][static_cast<std::size_t>(test)];
}
const std::optional<SignificanceCell>& SignificanceMatrix::cell(Feature f, Transition tr, TestKind test) const {
  return cells_[index(f)][static_cast<std::size_t>(tr)][static_cast<std::size_t>(test)];
}

bool SignificanceMatrix::covers(Transition tr, TestKind test) const {
  for (std::size_t f = 0; f < kFeatureCount; ++f)
    if (!cell(static_cast<Feature>(f), tr, test)) return false;
  return true;
}

void SignificanceMatrix::merge(const SignificanceMatrix& other) {
  for (std::size_t f = 0; f < kFeatureCount; ++f)
    for (auto tr : kTransitions)
      for (auto test : kTests)
        if (const auto& c = other.cell(static_cast<Feature>(f), tr, test)) cell(static_cast<Feature>(f), tr, test) = c;
}

SignificanceMatrix significance_matrix(const FeatureTable& table, TestKind test) {
  SignificanceMatrix m;
  const auto speakers = table.speakers();
  for (auto tr : kTransitions) {
    const auto [sa, sb] = sessions_of(tr);
    std::vector<const FeatureRow*> ra, rb;
    for (const auto& s : speakers) {
      const auto* a = table.find(s, sa);
      const auto* b = table.find(s, sb);
      if (a && b) {
        ra.push_back(a);
        rb.push_back(b);
      }
    }
    if (ra.size() < 2)
      throw Error(ErrorCode::InsufficientData, "transition " + std::string(to_string(tr)) +
                                                   " has fewer than two speakers with both sessions");
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      std::vector<std::optional<double>> a, b;
      for (std::size_t i = 0; i < ra.size(); ++i) {
        a.push_back(ra[i]->features.at(f));
        b.push_back(rb[i]->features.at(f));
      }
      SignificanceCell c;
      std::vector<double> d = differences(a, b);
      c.n_pairs = d.size();
      const double shift = mean(d);
      double p = 1.0;
      if (test == TestKind::t) {
        if (d.size() >= 2) {
          try {
            p = paired_t_test(a, b).p_value;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::Degenerate) throw;
            p = shift != 0.0 ? 0.0 : 1.0;
          }
        }
      } else {
        if (!d.empty()) {
          try {
            const auto w = wilcoxon_signed_rank(a, b);
            p = w.p_value;
            c.n_pairs = w.n_pairs;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::Degenerate) throw;
            p = 1.0;
          }
        }
      }
      c.p_value = p;
      c.tier = tier_of(p);
      c.direction = c.tier != Tier::none ? sign_direction(shift) : Direction::none;
      if (c.direction == Direction::none) c.tier = Tier::none;
      m.cell(static_cast<Feature>(f), tr, test) = c;
    }
  }
  return m;
}

SignificanceMatrix significance_matrix(const FeatureTable& table) {
  auto m = significance_matrix(table, TestKind::t);
  m.merge(significance_matrix(table, TestKind::W));
  return m;
}

void write_arrow_csv(std::ostream& out, const SignificanceMatrix& m) {
  out << "feature,transition,test,direction,tier\n";
  for (auto test : kTests)
    for (auto tr : kTransitions)
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const auto& c = m.cell(static_cast<Feature>(f), tr, test);
        if (!c) continue;
        out << feature_names()[f] << ',' << to_string(tr) << ',' << to_string(test) << ','
            << to_string(c->direction) << ',' << to_string(c->tier) << '\n';
      }
}

SignificanceMatrix read_arrow_csv(std::istream& in) {
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!csv::next_record(in, fields, line) || fields.size() != 5 || csv::trim(fields[0]) != "feature")
    throw Error(ErrorCode::Format, "arrow CSV: header must be feature,transition,test,direction,tier");
  SignificanceMatrix m;
  while (csv::next_record(in, fields, line)) {
    if (fields.size() != 5) throw Error(ErrorCode::Format, "arrow CSV line " + std::to_string(line) + ": expected 5 fields");
    const auto f = feature_from_name(csv::trim(fields[0]));
    if (!f) throw Error(ErrorCode::Format, "arrow CSV line " + std::to_string(line) + ": unknown feature '" + fields[0] + "'");
    SignificanceCell c;
    c.direction = parse_direction(fields[3]);
    c.tier = parse_tier(fields[4]);
    if ((c.direction == Direction::none) != (c.tier == Tier::none))
      throw Error(ErrorCode::Format, "arrow CSV line " + std::to_string(line) + ": direction and tier disagree");
    auto& slot = m.cell(*f, parse_transition(fields[1]), parse_test(fields[2]));
    if (slot) throw Error(ErrorCode::DuplicateKey, "arrow CSV line " + std::to_string(line) + ": duplicate cell");
    slot = c;
  }
  return m;
}

SignificanceMatrix read_arrow_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return read_arrow_csv(in);
}

bool TransitionVector::is_zero() const {
  return std::all_of(codes.begin(), codes.end(), [](int c) { return c == 0; });
}

TransitionVector transition_vector(const SignificanceMatrix& m, Transition tr, double alpha, TestKind test) {
  TransitionVector v;
  v.transition = tr;
  v.alpha = alpha;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto& c = m.cell(static_cast<Feature>(f), tr, test);
    if (!c || c->direction == Direction::none) continue;
    bool significant;
    if (c->p_value) {
      significant = *c->p_value < alpha;
    } else {
      const double bound = c->tier == Tier::p01 ? 0.01 : c->tier == Tier::p05 ? 0.05 : 2.0;
      significant = bound <= alpha + 1e-12;
    }
    if (significant) v.codes[f] = static_cast<int>(c->direction);
  }
  return v;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::InvalidArgument, "cosine similarity: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::Degenerate, "cosine similarity of a zero vector");
  return std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
}

double cosine_similarity(const TransitionVector& u, const TransitionVector& v) {
  std::array<double, kFeatureCount> a{}, b{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    a[i] = u.codes[i];
    b[i] = v.codes[i];
  }
  if (u.is_zero() || v.is_zero())
    throw Error(ErrorCode::Degenerate, "zero transition vector (" + std::string(to_string(u.is_zero() ? u.transition : v.transition)) + ")");
  return cosine_similarity(a, b);
}

TransitionSimilarity transition_similarity(const SignificanceMatrix& m, double alpha, TestKind test) {
  for (auto tr : kTransitions)
    if (!m.covers(tr, test))
      throw Error(ErrorCode::InsufficientData, "matrix does not cover transition " + std::string(to_string(tr)) +
                                                   " for test " + std::string(to_string(test)));
  const auto v12 = transition_vector(m, Transition::s1_s2, alpha, test);
  const auto v13 = transition_vector(m, Transition::s1_s3, alpha, test);
  const auto v23 = transition_vector(m, Transition::s2_s3, alpha, test);
  return {alpha, cosine_similarity(v12, v13), cosine_similarity(v12, v23), cosine_similarity(v13, v23)};
}

}  // namespace voxcue
