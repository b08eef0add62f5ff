#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "distconv/distance.hpp"
#include "distconv/errors.hpp"

using namespace distconv;
using V = std::vector<double>;

TEST_CASE("tv distance") {
  CHECK(tv_distance(V{.06, .13, .28, .26, .27}, V{.02, .07, .23, .31, .36}) == doctest::Approx(0.145).epsilon(1e-12));
  CHECK(tv_distance(V{.2, .3, .5}, V{.2, .3, .5}) == 0.0);
  CHECK(tv_distance(V{1, 0, 0, 0, 0}, V{0, 0, 0, 0, 1}) == 1.0);
  CHECK_THROWS_AS(tv_distance(V{.5, .5}, V{1, 0, 0}), ValidationError);
}

TEST_CASE("wcad enumeration") {
  auto r = wcad_bruteforce(V{.5, .5, 0}, V{0, .5, .5});
  CHECK(r.value == doctest::Approx(0.5));
  CHECK(r.witness_codes == std::vector<int>{1});
  r = wcad_bruteforce(V{.3, .7}, V{.3, .7});
  CHECK(r.value == 0.0);
  CHECK(r.witness_codes.empty());
  r = wcad_bruteforce(V{.6, .4}, V{.4, .6});
  CHECK(r.value == doctest::Approx(0.2));
  CHECK(r.witness_codes == std::vector<int>{1});
  REQUIRE(r.witness);
  CHECK(r.witness->expectation(V{.6, .4}) - r.witness->expectation(V{.4, .6}) == doctest::Approx(0.2));
}

TEST_CASE("coupling mismatch") {
  CHECK(min_coupling_mismatch(V{.6, .4}, V{.4, .6}) == doctest::Approx(0.2));
  CHECK(min_coupling_mismatch(V{.6, .4}, V{.6, .4}) == 0.0);
  CHECK(min_coupling_mismatch(V{.25, .25, .5}, V{.5, .25, .25}) == doctest::Approx(0.25));
}

TEST_CASE("kolmogorov distance") {
  auto r = kolmogorov_distance(V{.07, .26, .34, .24, .08}, V{.04, .16, .37, .31, .13});
  CHECK(r.value == doctest::Approx(0.13));
  CHECK(r.argmax_cutoffs == std::vector<int>{2});
  CHECK(kolmogorov_distance(V{.2, .8}, V{.2, .8}).value == 0.0);
  r = kolmogorov_distance(V{1, 0}, V{0, 1});
  CHECK(r.value == 1.0);
  CHECK(r.argmax_cutoffs == std::vector<int>{1});
}

TEST_CASE("owcad enumeration") {
  auto r = owcad_bruteforce(V{.5, .3, .2}, V{.2, .3, .5});
  CHECK(r.value == doctest::Approx(0.3));
  CHECK(r.witness_codes == std::vector<int>{1});
  CHECK(r.argmax_cutoffs == std::vector<int>{1, 2});
  CHECK(owcad_bruteforce(V{.1, .9}, V{.1, .9}).value == 0.0);
  CHECK(kolmogorov_distance(V{.5, .3, .2}, V{.2, .3, .5}).argmax_cutoffs == std::vector<int>{1, 2});
}

TEST_CASE("country distance") {
  CHECK(country_distance(V{2, 2}, V{1, 1}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(country_distance(V{1, 2}, V{1, 2}) == 0.0);
  CHECK(country_distance(V{1, 2, 3, 4, 1, 2, 3}, V{1, 2, 3, 4, 1, 2, 3}) == 0.0);
  CHECK_THROWS_AS(country_distance(V{1, 2}, V{1}), ValidationError);
}

TEST_CASE("scoring rules") {
  const int codes[] = {1, 3};
  const auto h = ScoringRule::indicator(3, codes);
  CHECK(h.expectation(V{.2, .3, .5}) == doctest::Approx(0.7));
  const auto t = ScoringRule::threshold(3, 1);
  CHECK(t.monotone());
  CHECK(t.expectation(V{.2, .3, .5}) == doctest::Approx(0.8));
  CHECK_THROWS_AS(ScoringRule(V{0.5, 1.5}), ValidationError);
  CHECK_THROWS_AS(ScoringRule(V{1.0, 0.5}, true), ValidationError);
}

TEST_CASE("improper inputs are accepted by the closed forms") {
  const V p{1.2, -0.2};
  const V q{0.5, 0.5};
  CHECK(tv_distance(p, q) == doctest::Approx(0.7));
  CHECK(kolmogorov_distance(p, q).value == doctest::Approx(0.7));
  CHECK(wcad_bruteforce(p, q).value == doctest::Approx(0.7));
}
