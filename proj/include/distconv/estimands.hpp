#pragma once

// Counterfactual and perturbed distributions built from a category system
// fit, and the global (delta at treatment 0) and marginal (derivative in a
// uniform treatment shift) convergence estimands for TV and Kolmogorov
// distance.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "distconv/ordinal.hpp"

namespace distconv {

/// Person-weighted mean of the fitted treatment-zero probabilities
/// gamma_f(i) (+ controls_i . delta when the fit has controls). Never
/// clipped; `proper()` reports whether every share lies in [0, 1].
ResponseDistribution counterfactual_distribution(const CategorySystemFit& fit,
                                                 const OrdinalScale& scale,
                                                 std::span<const std::string> persons);

/// base + epsilon * betas. Sums are preserved because sum(betas) = 0.
ResponseDistribution perturbed_distribution(const ResponseDistribution& base,
                                            std::span<const double> betas, double epsilon);

struct MtvdResult {
  double value = 0.0;
  std::vector<int> signs;  // +1 where p_treated >= p_reference
  bool kink = false;       // some category gap is zero; value is one-sided
};

MtvdResult mtvd_detail(const ResponseDistribution& p_treated,
                       const ResponseDistribution& p_reference, std::span<const double> betas);
double mtvd(const ResponseDistribution& p_treated, const ResponseDistribution& p_reference,
            std::span<const double> betas);

double delta_tv0(const ResponseDistribution& p_reference, const ResponseDistribution& p_treated,
                 const ResponseDistribution& p_counterfactual);
double delta_kd0(const ResponseDistribution& p_reference, const ResponseDistribution& p_treated,
                 const ResponseDistribution& p_counterfactual);

/// Marginal Kolmogorov divergence. Set-valued when several cutoffs attain
/// the largest CDF gap; `lo == hi` otherwise.
struct MkdResult {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<int> cutoffs;  // argmax set of |G(k)|
  bool undefined = false;    // distributions identical: interval is [-max|B|, max|B|]

  bool is_scalar() const { return lo == hi; }
  double point() const { return 0.5 * (lo + hi); }
};

MkdResult mkd(const ResponseDistribution& p_treated, const ResponseDistribution& p_reference,
              std::span<const double> betas);

struct EstimandSet {
  double tv_observed = 0.0;
  double tv_counterfactual = 0.0;
  double delta_tv0 = 0.0;
  double mtvd = 0.0;
  double kd_observed = 0.0;
  double kd_counterfactual = 0.0;
  double delta_kd0 = 0.0;
  MkdResult mkd;
  std::vector<int> mtvd_signs;
  bool mtvd_kink = false;
  bool counterfactual_proper = true;
};

EstimandSet compute_estimands(const ResponseDistribution& p_reference,
                              const ResponseDistribution& p_treated,
                              const ResponseDistribution& p_counterfactual,
                              std::span<const double> betas);

/// Per-country mean responses on a common item list, with the reference
/// country (e.g. the UK) the distances are measured against.
struct CountryTable {
  std::string reference;
  std::vector<std::string> items;
  std::map<std::string, std::vector<double>> means;

  double distance_to_reference(const std::string& country) const;
};

enum class SplitRule { regions, median_distance };

struct SplitContext {
  SplitRule rule = SplitRule::regions;
  std::map<std::string, std::string> country_region;  // regions rule
  std::vector<std::string> selected_regions;           // first partition
  CountryTable countries;                              // median rule
};

struct SplitResult {
  Panel first;
  Panel second;
  std::string first_label;
  std::string second_label;
  double median_distance = 0.0;  // median rule only
  std::vector<std::string> warnings;
};

/// Partitions the treated records; reference records go to both sides.
/// Regions rule: first = countries mapped to a selected region. Median rule:
/// first = countries strictly below the person-weighted median distance.
SplitResult heterogeneity_split(const Panel& panel, const SplitContext& ctx);

}  // namespace distconv
