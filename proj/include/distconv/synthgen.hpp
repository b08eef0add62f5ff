#pragma once

// Synthetic sibling panels with known ground truth.
//
// Each treated family draws an arrival age for its eldest child; younger
// siblings are born `birth_gap` years apart, so their migration ages are
// max(0, eldest_age - cumulative gap). Family category probabilities are
//
//   gamma_f = (1 - spread) * center + spread * U_f + confounding * z_f * direction
//
// with U_f uniform on the simplex and z_f in [-1, 1] the standardized eldest
// arrival age. A treated sibling answers category a with probability
// gamma_f[a] + mig_age * beta[a]. Reference families answer from a fixed
// distribution.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "distconv/estimands.hpp"
#include "distconv/ordinal.hpp"

namespace distconv {

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct SyntheticConfig {
  std::size_t n_families = 500;
  IntRange siblings{2, 4};
  std::vector<double> true_betas;
  std::vector<double> effect_center;
  double effect_spread = 0.2;
  IntRange first_arrival_age{0, 15};
  IntRange birth_gap{1, 4};
  double confounding = 0.0;
  std::vector<double> confounding_direction;  // sums to 0; empty when unused
  std::vector<double> reference_distribution;
  std::size_t n_reference_families = 500;
  IntRange reference_siblings{2, 3};
  std::vector<std::string> questions{"Q1"};
  std::vector<std::string> countries;  // family country drawn uniformly; empty: none
  std::string wave = "a";
  std::uint64_t seed = 1;

  std::size_t categories() const { return true_betas.size(); }
  /// Throws ValidationError unless every implied probability stays in
  /// [0, 1] over the whole treatment support (interval bound).
  void validate() const;
};

struct SyntheticTruth {
  std::vector<double> betas;
  /// question -> family -> gamma_f
  std::map<std::string, std::map<std::string, std::vector<double>>> family_effects;
};

struct SyntheticPanel {
  Panel panel;
  SyntheticTruth truth;
};

SyntheticPanel generate_panel(const SyntheticConfig& config);

/// Infinite-population values implied by a config.
struct TrueEstimands {
  ResponseDistribution p_treated;
  ResponseDistribution p_counterfactual;
  ResponseDistribution p_reference;
  double mean_treatment = 0.0;  // person-weighted E[mig_age]
  EstimandSet estimands;
  /// MTVD by central difference of TV on the exact population shares.
  double mtvd_finite_difference = 0.0;
};

TrueEstimands true_estimands(const SyntheticConfig& config);

}  // namespace distconv
