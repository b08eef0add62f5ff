#pragma once

// Family fixed-effects least squares: the within transformation, OLS on the
// demeaned design with family-clustered (CR1) standard errors, and the
// regressions built on top of it (mean score, binarized, per-category LPM
// system).

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "distconv/ordinal.hpp"

namespace distconv {

/// Column-retention threshold, relative to the largest demeaned column norm.
inline constexpr double kRankTolerance = 1e-10;

struct DemeanedDesign {
  Eigen::MatrixXd values;               // retained rows, family means removed
  Eigen::MatrixXd family_means;         // one row per retained family
  std::vector<std::size_t> rows;        // input row index of each retained row
  std::vector<int> cluster;             // retained family index per retained row
  std::vector<std::string> families;    // retained family ids, first-appearance order
  std::vector<std::string> dropped_families;  // singleton families
  std::vector<bool> degenerate;         // column is identically zero after demeaning
};

/// Subtracts family means from every column. Families with a single row
/// carry no within variation and are dropped (and listed).
DemeanedDesign within_demean(const Eigen::MatrixXd& columns,
                             std::span<const std::string> families);

struct FeOlsFit {
  std::vector<std::string> column_names;
  Eigen::VectorXd beta;        // one entry per input column; dropped columns are 0
  Eigen::VectorXd cluster_se;  // CR1, NaN when fewer than 2 families
  std::map<std::string, double> family_effects;
  Eigen::VectorXd residuals;   // on retained rows
  std::vector<std::string> dropped_columns;
  std::size_t n_obs = 0;
  std::size_t n_families = 0;
};

/// In-order column retention: column j is kept iff its component orthogonal
/// to the previously kept columns has norm above tol * max column norm.
std::vector<bool> retained_columns(const Eigen::MatrixXd& x, double tol = kRankTolerance);

/// Sandwich (X'X)^-1 (sum_g X_g' u_g u_g' X_g) (X'X)^-1 without any
/// small-sample factor. `cluster[i]` in [0, n_clusters).
Eigen::MatrixXd cluster_sandwich(const Eigen::MatrixXd& x, const Eigen::VectorXd& resid,
                                 std::span<const int> cluster, int n_clusters);

/// G/(G-1) * (N-1)/(N-k).
double cr1_factor(std::size_t n_clusters, std::size_t n_obs, std::size_t n_regressors);

/// Within estimator for several outcomes sharing one design. Column 0 of
/// `x` is the treatment; an all-degenerate treatment is an EstimationError.
std::vector<FeOlsFit> fit_fe_ols_multi(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
                                       std::span<const std::string> families,
                                       const std::vector<std::string>& column_names);

FeOlsFit fit_fe_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                    std::span<const std::string> families,
                    const std::vector<std::string>& column_names);

struct Controls {
  bool oldest = false;
  bool sex = false;
  bool linear_age = false;
  bool flexible_age = false;

  bool any() const { return oldest || sex || linear_age || flexible_age; }
  friend bool operator==(const Controls&, const Controls&) = default;
};

/// Parses a comma list of {oldest, sex, linear_age, flexible_age}.
Controls parse_controls(const std::string& csv);
std::string to_string(const Controls& c);

enum class OutcomeKind { mean_score, binarized, category_indicator };

struct RegressionSpec {
  OutcomeKind outcome = OutcomeKind::mean_score;
  std::set<int> threshold_set;  // binarized: codes mapped to 1
  int category = 0;             // category_indicator
  Controls controls;
  std::string question_id;

  static RegressionSpec mean_score(std::string question, Controls c = {});
  static RegressionSpec binarized(std::string question, std::set<int> codes, Controls c = {});
  static RegressionSpec category_indicator(std::string question, int code, Controls c = {});
};

/// Treatment column followed by the requested controls, for a record set.
struct Design {
  Eigen::MatrixXd x;
  std::vector<std::string> names;
  std::vector<std::string> families;
  std::vector<std::string> persons;
};

Design build_design(std::span<const RespondentRecord* const> records, const Controls& controls);

FeOlsFit fit_regression(const Panel& panel, const RegressionSpec& spec);
FeOlsFit fit_mean_score(const Panel& panel, const std::string& question, Controls controls = {});

/// One LPM per category with outcome 1{response = a}, on the treated
/// records of `question`. Categories never chosen get beta = 0 and
/// gamma = 0 and are listed in `degenerate_categories`.
CategorySystemFit fit_category_system(const Panel& panel, const std::string& question,
                                      Controls controls = {});

}  // namespace distconv
