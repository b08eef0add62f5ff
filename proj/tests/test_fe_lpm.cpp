#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "distconv/errors.hpp"
#include "distconv/fe_lpm.hpp"
#include "helpers.hpp"

using namespace distconv;
using testutil::treated;

namespace {
Eigen::MatrixXd col(std::initializer_list<double> v) {
  Eigen::MatrixXd m(v.size(), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}
}  // namespace

TEST_CASE("within demeaning") {
  const std::vector<std::string> one{"A", "A"};
  auto d = within_demean(col({1, 3}), one);
  CHECK(d.values(0, 0) == -1.0);
  CHECK(d.values(1, 0) == 1.0);

  const std::vector<std::string> two{"A", "A", "B", "B"};
  d = within_demean(col({1, 3, 2, 6}), two);
  CHECK(d.values(0, 0) == -1.0);
  CHECK(d.values(1, 0) == 1.0);
  CHECK(d.values(2, 0) == -2.0);
  CHECK(d.values(3, 0) == 2.0);
  CHECK(d.family_means(1, 0) == 4.0);

  d = within_demean(col({5, 5, 5}), std::vector<std::string>{"A", "A", "A"});
  CHECK(d.degenerate[0]);

  d = within_demean(col({1, 3, 7}), std::vector<std::string>{"A", "A", "S"});
  CHECK(d.rows.size() == 2);
  CHECK(d.dropped_families == std::vector<std::string>{"S"});
  CHECK_THROWS_AS(within_demean(col({1, 2}), std::vector<std::string>{"A", "B"}), EstimationError);
}

TEST_CASE("hand within-OLS example") {
  const std::vector<std::string> fam{"A", "A", "B", "B"};
  Eigen::VectorXd y(4);
  y << 1, 2, 5, 7;
  const auto f = fit_fe_ols(y, col({1, 3, 2, 6}), fam, {"x"});
  CHECK(f.beta(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.family_effects.at("A") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.family_effects.at("B") == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(f.n_obs == 4);
  CHECK(f.n_families == 2);
}

TEST_CASE("exact within fit") {
  const std::vector<std::string> fam{"A", "A", "A", "B", "B", "C", "C"};
  const auto x = col({1, 2, 4, 3, 8, 0, 5});
  const double c[] = {2, 2, 2, -1, -1, 0.5, 0.5};
  Eigen::VectorXd y(7);
  for (int i = 0; i < 7; ++i) y(i) = c[i] + x(i, 0);
  const auto f = fit_fe_ols(y, x, fam, {"x"});
  CHECK(f.beta(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.residuals.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(f.cluster_se(0)) < 1e-10);
}

TEST_CASE("in-order column retention drops the last collinear column") {
  Eigen::MatrixXd x(4, 3);
  x << 1, 2, 1, 2, 4, 0, 3, 6, 1, 4, 8, 0;
  const auto keep = retained_columns(x);
  CHECK(keep == std::vector<bool>{true, false, true});
}

TEST_CASE("small-sample factor") {
  CHECK(cr1_factor(2, 4, 1) == doctest::Approx(2.0));
  CHECK(cr1_factor(10, 100, 3) == doctest::Approx(10.0 / 9.0 * 99.0 / 97.0));
  CHECK(std::isnan(cr1_factor(1, 4, 1)));
}

TEST_CASE("cluster sandwich with one row per cluster is HC0") {
  Eigen::MatrixXd x(5, 2);
  x << 1, 0.5, -2, 1, 0.3, -1, 1.5, 2, -0.8, 0.1;
  Eigen::VectorXd u(5);
  u << 0.2, -0.4, 0.1, 0.3, -0.2;
  const std::vector<int> cl{0, 1, 2, 3, 4};
  const Eigen::MatrixXd v = cluster_sandwich(x, u, cl, 5);
  const Eigen::MatrixXd bread = (x.transpose() * x).inverse();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < 5; ++i) meat += u(i) * u(i) * x.row(i).transpose() * x.row(i);
  const Eigen::MatrixXd hc0 = bread * meat * bread;
  CHECK((v - hc0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two-person families: cluster meat is twice the HC0 meat") {
  // after demeaning, the pair's rows and residuals are exact negatives
  const std::vector<std::string> fam{"A", "A", "B", "B", "C", "C", "D", "D"};
  const auto x = col({1, 4, 2, 3, 7, 1, 0, 5});
  Eigen::VectorXd y(8);
  y << 1, 3, 2, 2, 5, 1, 0, 4;
  const auto f = fit_fe_ols(y, x, fam, {"x"});
  const auto d = within_demean(x, fam);
  const Eigen::MatrixXd clustered = cluster_sandwich(d.values, f.residuals, d.cluster, 4);
  const std::vector<int> own{0, 1, 2, 3, 4, 5, 6, 7};
  const Eigen::MatrixXd hc0 = cluster_sandwich(d.values, f.residuals, own, 8);
  CHECK(clustered(0, 0) == doctest::Approx(2.0 * hc0(0, 0)).epsilon(1e-12));
  CHECK(f.cluster_se(0) == doctest::Approx(std::sqrt(cr1_factor(4, 8, 1) * clustered(0, 0))).epsilon(1e-12));
}

TEST_CASE("oldest control collinear in two-sibling families") {
  // every family: two siblings arriving together, born two years apart
  std::vector<RespondentRecord> recs;
  for (int f = 0; f < 6; ++f) {
    const std::string fam = "F" + std::to_string(f);
    auto a = treated(fam + "a", fam, 1 + (f % 5), 4.0 + f);
    a.oldest = 1;
    auto b = treated(fam + "b", fam, 1 + ((f + 2) % 5), 2.0 + f);
    recs.push_back(a);
    recs.push_back(b);
  }
  Controls c;
  c.oldest = true;
  const Panel panel(OrdinalScale::likert5(), recs);
  auto fit = fit_regression(panel, RegressionSpec::mean_score("Q1", c));
  CHECK(fit.dropped_columns == std::vector<std::string>{"oldest"});
  CHECK(fit.beta(1) == 0.0);

  // a three-sibling family with a different spacing identifies both
  auto x = treated("Xa", "X", 2, 9.0);
  x.oldest = 1;
  recs.push_back(x);
  recs.push_back(treated("Xb", "X", 4, 8.0));
  recs.push_back(treated("Xc", "X", 3, 3.0));
  fit = fit_regression(Panel(OrdinalScale::likert5(), recs), RegressionSpec::mean_score("Q1", c));
  CHECK(fit.dropped_columns.empty());
}

TEST_CASE("treatment without within-family variation is an estimation error") {
  std::vector<RespondentRecord> recs{treated("a", "F", 1, 3), treated("b", "F", 2, 3),
                                     treated("c", "G", 1, 5), treated("d", "G", 4, 5)};
  const Panel panel(OrdinalScale::likert5(), recs);
  CHECK_THROWS_AS(fit_mean_score(panel, "Q1"), EstimationError);
}

TEST_CASE("category system: adding up and degenerate categories") {
  std::vector<RespondentRecord> recs{treated("a", "F", 1, 1), treated("b", "F", 2, 3),
                                     treated("c", "F", 2, 4), treated("d", "G", 4, 2),
                                     treated("e", "G", 1, 6), treated("s", "S", 4, 1)};
  const Panel panel(OrdinalScale::likert5(), recs);
  const auto fit = fit_category_system(panel, "Q1");
  double sb = 0.0;
  for (double b : fit.betas) sb += b;
  CHECK(std::abs(sb) < 1e-12);
  for (const auto& [fam, g] : fit.family_effects) {
    double s = 0.0;
    for (double v : g) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(fit.degenerate_categories == std::vector<int>{3, 5});
  CHECK(fit.betas[2] == 0.0);
  CHECK(fit.betas[4] == 0.0);
  CHECK(fit.family_effects.at("F")[2] == 0.0);
  CHECK(fit.dropped_families == std::vector<std::string>{"S"});
  CHECK(fit.n_obs == 5);
}

TEST_CASE("controls parsing") {
  const auto c = parse_controls("oldest,flexible_age");
  CHECK(c.oldest);
  CHECK(c.flexible_age);
  CHECK_FALSE(c.sex);
  CHECK(to_string(c) == "oldest,flexible_age");
  CHECK_THROWS_AS(parse_controls("height"), ValidationError);
  const Panel panel(OrdinalScale::likert5(), {treated("a", "F", 1, 1), treated("b", "F", 2, 3)});
  CHECK_THROWS_AS(fit_regression(panel, RegressionSpec::binarized("Q1", {})), ValidationError);
  CHECK_THROWS_AS(fit_regression(panel, RegressionSpec::binarized("Q1", {1, 2, 3, 4, 5})), ValidationError);
  CHECK_THROWS_AS(fit_regression(panel, RegressionSpec::binarized("Q1", {6})), ValidationError);
}
