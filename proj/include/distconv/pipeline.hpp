#pragma once

// Command pipeline behind the CLI: per-question analysis, bootstrap
// statistic layout, and report emission.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "distconv/estimands.hpp"
#include "distconv/io.hpp"
#include "distconv/ordinal.hpp"

namespace distconv {

inline constexpr const char* kVersion = "0.1.0";

/// Treated records of `question` whose family has at least two treated
/// members on it (the sibling sample the fixed-effects fit uses).
std::vector<const RespondentRecord*> analysis_population(const Panel& panel,
                                                         const std::string& question);

struct QuestionAnalysis {
  std::string question;
  ResponseDistribution p_treated;
  ResponseDistribution p_reference;
  ResponseDistribution p_counterfactual;
  CategorySystemFit fit;
  EstimandSet estimands;
  std::size_t excluded_singletons = 0;
};

QuestionAnalysis analyze_question(const Panel& panel, const std::string& question,
                                  Controls controls = {});

/// Offsets into the per-question block of the bootstrap statistic.
struct StatLayout {
  enum Scalar : std::size_t {
    tv_observed,
    tv_counterfactual,
    delta_tv0,
    mtvd,
    kd_observed,
    kd_counterfactual,
    delta_kd0,
    mkd_lo,
    mkd_hi,
    sum_betas,
    mean_sum_fe,
    degenerate_categories,
    n_scalars
  };
  std::size_t k = 0;

  std::size_t block() const { return n_scalars + 4 * k; }
  std::size_t beta(std::size_t a) const { return n_scalars + a; }
  std::size_t treated_share(std::size_t a) const { return n_scalars + k + a; }
  std::size_t counterfactual_share(std::size_t a) const { return n_scalars + 2 * k + a; }
  std::size_t reference_share(std::size_t a) const { return n_scalars + 3 * k + a; }
};

std::vector<double> analysis_vector(const QuestionAnalysis& qa);

/// Concatenated per-question blocks; the bootstrap statistic.
std::vector<double> analysis_statistic(const Panel& panel, const std::vector<std::string>& questions,
                                       Controls controls);

struct ReportRecord {
  std::string estimand;
  std::string question;
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string flags;
};

inline const std::vector<std::string> kCommands = {
    "estimate", "distances", "counterfactual", "marginal", "hetero", "simulate", "report"};

/// Runs one subcommand and writes its reports under config.out_dir.
/// Returns the written paths. Throws ValidationError / EstimationError.
std::vector<std::filesystem::path> run_command(const std::string& command, const RunConfig& config);

/// "0.148 [0.112, 0.184]" at six significant digits.
std::string format_cell(double point, double lo, double hi);

}  // namespace distconv
