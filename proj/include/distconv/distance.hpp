#pragma once

// Distances between response distributions on a common ordinal scale.
//
// The closed forms (tv_distance, kolmogorov_distance, min_coupling_mismatch)
// are what the estimators use. The *_bruteforce functions are independent
// oracles: they search the extreme points of the scoring-rule class
// directly, so agreement with the closed forms is a real check and not a
// restatement.
//
// Span overloads take raw vectors and do not enforce the sum-to-one
// invariant; ResponseDistribution overloads check that both sides share a
// scale and, where stated, that inputs are proper.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "distconv/ordinal.hpp"

namespace distconv {

inline constexpr std::size_t kMaxEnumerationCategories = 20;
inline constexpr double kTieTolerance = 1e-12;

/// A map from categories to [0, 1]. `monotone` rules are nondecreasing in
/// the category code.
class ScoringRule {
 public:
  explicit ScoringRule(std::vector<double> values, bool monotone = false);

  static ScoringRule indicator(std::size_t k, std::span<const int> codes);
  /// h(a) = 1{a > cutoff}.
  static ScoringRule threshold(std::size_t k, int cutoff);

  std::span<const double> values() const { return values_; }
  bool monotone() const { return monotone_; }
  double expectation(std::span<const double> probs) const;

 private:
  std::vector<double> values_;
  bool monotone_;
};

struct DistanceResult {
  double value = 0.0;
  std::optional<ScoringRule> witness;
  /// For subset witnesses: category codes in the subset. For threshold
  /// witnesses: the single cutoff k.
  std::vector<int> witness_codes;
  /// Kolmogorov / threshold searches: every cutoff within kTieTolerance of
  /// the maximum, ascending.
  std::vector<int> argmax_cutoffs;
};

/// Half the L1 distance. With equal total mass it is computed as the larger
/// of the positive and negative parts of p - q, summed in category order.
double tv_distance(std::span<const double> p, std::span<const double> q);
double tv_distance(const ResponseDistribution& p, const ResponseDistribution& q);

/// 1 - sum_a min(p_a, q_a): mismatch probability of the optimal coupling.
double min_coupling_mismatch(std::span<const double> p, std::span<const double> q);
double min_coupling_mismatch(const ResponseDistribution& p, const ResponseDistribution& q);

/// Largest |F_p(k) - F_q(k)| over cutoffs k = 1..K-1.
DistanceResult kolmogorov_distance(std::span<const double> p, std::span<const double> q);
DistanceResult kolmogorov_distance(const ResponseDistribution& p, const ResponseDistribution& q);

/// Worst-case average difference by enumeration of all 2^K indicator rules.
/// The witness subset S maximizes sum_{a in S}(p_a - q_a); the first subset
/// in mask order wins ties, so p == q yields the empty set.
DistanceResult wcad_bruteforce(std::span<const double> p, std::span<const double> q);
DistanceResult wcad_bruteforce(const ResponseDistribution& p, const ResponseDistribution& q);

/// Worst-case average difference over monotone rules, by enumeration of
/// the K-1 threshold rules 1{a > k}. Computed from tail sums, not CDFs.
DistanceResult owcad_bruteforce(std::span<const double> p, std::span<const double> q);
DistanceResult owcad_bruteforce(const ResponseDistribution& p, const ResponseDistribution& q);

/// Euclidean distance between two countries' mean-response vectors.
double country_distance(std::span<const double> means_a, std::span<const double> means_b);

}  // namespace distconv
