#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "distconv/distance.hpp"
#include "distconv/errors.hpp"
#include "distconv/estimands.hpp"
#include "distconv/fe_lpm.hpp"
#include "helpers.hpp"

using namespace distconv;
using testutil::reference;
using testutil::treated;
using V = std::vector<double>;

namespace {
const OrdinalScale k2 = OrdinalScale::with_size(2);
ResponseDistribution d2(double a) { return ResponseDistribution(k2, {a, 1.0 - a}); }
}  // namespace

TEST_CASE("counterfactual is the person-weighted family intercept mean") {
  CategorySystemFit fit;
  fit.betas = {0.0, 0.0};
  fit.family_effects = {{"F1", {.2, .8}}, {"F2", {.4, .6}}};
  fit.person_family = {{"p1", "F1"}, {"p2", "F2"}};
  const std::vector<std::string> persons{"p1", "p2"};
  const auto cf = counterfactual_distribution(fit, k2, persons);
  CHECK(cf[0] == doctest::Approx(.3));
  CHECK(cf[1] == doctest::Approx(.7));
  const std::vector<std::string> missing{"p1", "p9"};
  CHECK_THROWS_AS(counterfactual_distribution(fit, k2, missing), EstimationError);
}

TEST_CASE("zero slopes give back the observed treated shares") {
  // responses unrelated to arrival age within each family
  std::vector<RespondentRecord> recs{treated("a", "F", 1, 1), treated("b", "F", 2, 3),
                                     treated("c", "F", 2, 5), treated("d", "F", 1, 7),
                                     treated("e", "G", 3, 2), treated("f", "G", 3, 4)};
  const Panel panel(OrdinalScale::with_size(3), recs);
  const auto fit = fit_category_system(panel, "Q1");
  for (double b : fit.betas) CHECK(std::abs(b) < 1e-12);
  std::vector<std::string> persons{"a", "b", "c", "d", "e", "f"};
  const auto cf = counterfactual_distribution(fit, panel.scale(), persons);
  const auto obs = empirical_distribution(panel, "Q1", Group::treated);
  for (std::size_t i = 0; i < 3; ++i) CHECK(cf[i] == doctest::Approx(obs[i]).epsilon(1e-12));
}

TEST_CASE("perturbed distribution") {
  const V beta{.01, -.01};
  const auto base = d2(.4);
  auto p = perturbed_distribution(base, beta, 2.0);
  CHECK(p[0] == doctest::Approx(.42));
  CHECK(p[1] == doctest::Approx(.58));
  p = perturbed_distribution(base, beta, 0.0);
  CHECK(p[0] == .4);
  p = perturbed_distribution(base, beta, -100.0);
  CHECK_FALSE(p.proper());
}

TEST_CASE("mtvd") {
  const V beta{.01, -.01};
  CHECK(mtvd(d2(.4), d2(.5), beta) == doctest::Approx(-.01));
  CHECK(mtvd(d2(.4), d2(.5), V{0, 0}) == 0.0);
  const auto det = mtvd_detail(d2(.4), d2(.5), beta);
  CHECK(det.signs == std::vector<int>{-1, 1});
  CHECK_FALSE(det.kink);
  const double e = 1e-6;
  const double fd = (tv_distance(perturbed_distribution(d2(.4), beta, e), d2(.5)) -
                     tv_distance(perturbed_distribution(d2(.4), beta, -e), d2(.5))) /
                    (2 * e);
  CHECK(fd == doctest::Approx(-.01).epsilon(1e-6));
  // zero gap: "+" sign convention and a kink flag
  const auto kink = mtvd_detail(d2(.5), d2(.5), beta);
  CHECK(kink.kink);
  CHECK(kink.value == doctest::Approx(0.0));
}

TEST_CASE("delta estimands") {
  const auto r = d2(.5);
  const auto t = d2(.2);
  const auto c = d2(.35);
  CHECK(delta_tv0(r, t, t) == 0.0);
  CHECK(delta_tv0(r, t, r) == doctest::Approx(tv_distance(r, t)));
  CHECK(delta_kd0(r, t, t) == 0.0);
  CHECK(delta_kd0(r, t, r) == doctest::Approx(kolmogorov_distance(r, t).value));
  CHECK(delta_tv0(r, t, c) == -delta_tv0(r, c, t));
  CHECK(delta_tv0(r, t, c) == tv_distance(r, t) - tv_distance(r, c));
}

TEST_CASE("mkd") {
  auto m = mkd(ResponseDistribution(k2, {.3, .7}), ResponseDistribution(k2, {.5, .5}), V{.02, -.02});
  CHECK(m.is_scalar());
  CHECK(m.lo == doctest::Approx(-.02));
  CHECK(m.cutoffs == std::vector<int>{1});
  m = mkd(d2(.3), d2(.5), V{0, 0});
  CHECK(m.lo == 0.0);
  CHECK(m.hi == 0.0);

  // tie at cutoffs 1 and 2: interval over sign(G) B
  const OrdinalScale k3 = OrdinalScale::with_size(3);
  m = mkd(ResponseDistribution(k3, {.5, .3, .2}), ResponseDistribution(k3, {.2, .3, .5}), V{.01, .02, -.03});
  CHECK_FALSE(m.is_scalar());
  CHECK(m.cutoffs == std::vector<int>{1, 2});
  CHECK(m.lo == doctest::Approx(.01));
  CHECK(m.hi == doctest::Approx(.03));

  // identical distributions: undefined, symmetric interval
  m = mkd(ResponseDistribution(k3, {.2, .3, .5}), ResponseDistribution(k3, {.2, .3, .5}), V{.01, .02, -.03});
  CHECK(m.undefined);
  CHECK(m.lo == doctest::Approx(-.03));
  CHECK(m.hi == doctest::Approx(.03));
}

TEST_CASE("estimand set identities") {
  const OrdinalScale k3 = OrdinalScale::with_size(3);
  const ResponseDistribution r(k3, {.2, .5, .3});
  const ResponseDistribution t(k3, {.4, .4, .2});
  const ResponseDistribution c(k3, {.3, .45, .25});
  const V beta{.01, -.004, -.006};
  const auto e = compute_estimands(r, t, c, beta);
  CHECK(e.delta_tv0 == e.tv_observed - e.tv_counterfactual);
  CHECK(e.delta_kd0 == e.kd_observed - e.kd_counterfactual);
  CHECK(std::abs(e.mtvd) <= 0.5 * (0.01 + 0.004 + 0.006) + 1e-15);
  CHECK(e.counterfactual_proper);
}

TEST_CASE("heterogeneity split") {
  const auto s = OrdinalScale::likert5();
  auto mk = [](std::string id, std::string fam, std::string cc) {
    auto r = treated(std::move(id), std::move(fam), 2, 3);
    r.country_code = std::move(cc);
    return r;
  };
  std::vector<RespondentRecord> recs{mk("a", "A", "C1"), mk("b", "B", "C2"), mk("c", "C", "C3"),
                                     mk("d", "D", "C4"), reference("r", "R", 3)};
  const Panel panel(s, recs);

  SplitContext med;
  med.rule = SplitRule::median_distance;
  med.countries.reference = "UK";
  med.countries.items = {"i1"};
  med.countries.means = {{"UK", {0.0}}, {"C1", {0.1}}, {"C2", {0.2}}, {"C3", {0.3}}, {"C4", {0.4}}};
  const auto out = heterogeneity_split(panel, med);
  CHECK(out.median_distance == doctest::Approx(0.25));
  CHECK(out.first.select("Q1", Group::treated).size() == 2);
  CHECK(out.second.select("Q1", Group::treated).size() == 2);
  CHECK(out.first.select("Q1", Group::treated)[0]->country_code == "C1");
  CHECK(out.first.select("Q1", Group::reference).size() == 1);
  CHECK(out.second.select("Q1", Group::reference).size() == 1);

  SplitContext reg;
  reg.rule = SplitRule::regions;
  reg.country_region = {{"C1", "West"}, {"C2", "West"}, {"C3", "West"}, {"C4", "West"}};
  reg.selected_regions = {"West"};
  const auto all = heterogeneity_split(panel, reg);
  CHECK(all.second.select("Q1", Group::treated).empty());
  CHECK(all.warnings.size() == 1);

  reg.country_region.erase("C4");
  CHECK_THROWS_AS(heterogeneity_split(panel, reg), ValidationError);
}
