#pragma once

// Paired significance tests across sessions, significance arrow matrices,
// transition vectors and their cosine similarity.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "voxcue/features.hpp"

namespace voxcue {

enum class Direction { down = -1, none = 0, up = 1 };
enum class TestKind { t, W };
enum class Tier { none, p05, p01 };
enum class Transition { s1_s2, s1_s3, s2_s3 };

inline constexpr std::array<Transition, 3> kTransitions = {Transition::s1_s2, Transition::s1_s3, Transition::s2_s3};
inline constexpr std::array<TestKind, 2> kTests = {TestKind::t, TestKind::W};

std::string_view to_string(Direction d);
std::string_view to_string(TestKind t);
std::string_view to_string(Tier t);
std::string_view to_string(Transition t);  // "1->2"
Direction parse_direction(std::string_view s);
TestKind parse_test(std::string_view s);
Tier parse_tier(std::string_view s);
Transition parse_transition(std::string_view s);
std::pair<Session, Session> sessions_of(Transition t);

struct PairedTestResult {
  double statistic = 0.0;       // t, or W+ for the signed-rank test
  double p_value = 1.0;         // two-sided
  double mean_difference = 0.0; // mean of b - a over the pairs used
  Direction direction = Direction::none;
  std::size_t n_pairs = 0;      // pairs entering the test (nonzero ones for W)
};

/// Differences are b - a. Pairs with an absent side are dropped first.
/// Throws InsufficientData for n < 2, Degenerate for zero-variance differences.
PairedTestResult paired_t_test(std::span<const std::optional<double>> a, std::span<const std::optional<double>> b,
                               double alpha = 0.05);
PairedTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

/// Zero differences are dropped, ties get average ranks. The two-sided p is
/// exact (sign-assignment enumeration) for n <= 25, else a normal approximation
/// with continuity and tie correction. Throws Degenerate if every difference is zero.
PairedTestResult wilcoxon_signed_rank(std::span<const std::optional<double>> a,
                                      std::span<const std::optional<double>> b, double alpha = 0.05);
PairedTestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

inline constexpr std::size_t kExactWilcoxonMax = 25;

/// Exact two-sided p of the signed-rank statistic given the ranks in use.
/// Ranks are given doubled so average ranks stay integral.
double wilcoxon_exact_p(std::span<const std::uint32_t> doubled_ranks, std::uint64_t doubled_w_plus);

Tier tier_of(double p);

struct SignificanceCell {
  Direction direction = Direction::none;
  Tier tier = Tier::none;
  std::optional<double> p_value;  // absent when read from a tier-only matrix
  std::size_t n_pairs = 0;
};

/// 30 features x 3 transitions x 2 tests; cells not computed stay absent.
class SignificanceMatrix {
public:
  std::optional<SignificanceCell>& cell(Feature f, Transition tr, TestKind test);
  const std::optional<SignificanceCell>& cell(Feature f, Transition tr, TestKind test) const;
  bool covers(Transition tr, TestKind test) const;
  void merge(const SignificanceMatrix& other);

private:
  std::array<std::array<std::array<std::optional<SignificanceCell>, 2>, 3>, kFeatureCount> cells_{};
};

/// Runs `test` for every feature and transition. Directions follow the sign of
/// the mean shift whenever p < .05. A zero-variance shift counts as p = 0
/// (nonzero mean) or p = 1 (no change). Throws InsufficientData when a
/// transition has fewer than two speakers with both sessions.
SignificanceMatrix significance_matrix(const FeatureTable& table, TestKind test);
SignificanceMatrix significance_matrix(const FeatureTable& table);  // both tests

/// Arrow CSV: feature,transition,test,direction,tier
void write_arrow_csv(std::ostream& out, const SignificanceMatrix& m);
SignificanceMatrix read_arrow_csv(std::istream& in);
SignificanceMatrix read_arrow_csv(const std::filesystem::path& path);

struct TransitionVector {
  std::array<int, kFeatureCount> codes{};
  Transition transition = Transition::s1_s2;
  double alpha = 0.05;
  bool is_zero() const;
};

/// +1 / -1 where the shift is significant at alpha, 0 otherwise. With a p-value
/// the cell counts when p < alpha; a tier-only cell counts when its tier bound
/// (.01 or .05) does not exceed alpha.
TransitionVector transition_vector(const SignificanceMatrix& m, Transition tr, double alpha, TestKind test = TestKind::W);

/// Throws InvalidArgument on dimension mismatch, Degenerate on a zero vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
double cosine_similarity(const TransitionVector& u, const TransitionVector& v);

struct TransitionSimilarity {
  double alpha = 0.05;
  double c12_13 = 0.0;
  double c12_23 = 0.0;
  double c13_23 = 0.0;
};

TransitionSimilarity transition_similarity(const SignificanceMatrix& m, double alpha, TestKind test = TestKind::W);

}  // namespace voxcue
