#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <stdexcept>

#include "distconv/errors.hpp"
#include "distconv/resampling.hpp"
#include "distconv/synthgen.hpp"
#include "helpers.hpp"

using namespace distconv;
using testutil::reference;
using testutil::treated;

namespace {
Panel three_families() {
  return Panel(OrdinalScale::likert5(),
               {treated("a1", "A", 1, 1), treated("a2", "A", 2, 3), treated("b1", "B", 3, 2),
                treated("b2", "B", 4, 5), treated("c1", "C", 5, 1), treated("c2", "C", 1, 4)});
}

SyntheticConfig small_config(std::uint64_t seed) {
  SyntheticConfig c;
  c.n_families = 60;
  c.n_reference_families = 40;
  c.true_betas = {.01, .005, 0, -.005, -.01};
  c.effect_center = {.2, .2, .2, .2, .2};
  c.reference_distribution = {.1, .2, .4, .2, .1};
  c.seed = seed;
  return c;
}
}  // namespace

TEST_CASE("seed derivation and portable draws") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.index(7) == b.index(7));
  Rng c(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const int v = c.between(2, 4);
    CHECK((v >= 2 && v <= 4));
  }
}

TEST_CASE("replay: B=2, seed 7, three families") {
  const Panel p = three_families();
  const Statistic count = [](const Panel& x) { return std::vector<double>{double(x.family_ids().size())}; };
  BootstrapOptions o;
  o.reps = 2;
  o.seed = 7;
  const auto run = family_bootstrap(p, count, o);
  REQUIRE(run.replicates.size() == 2);
  REQUIRE(run.draws.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(run.draws[r].size() == 3);
    CHECK(run.draws[r] == draw_families(7, r, 3));
    // each drawn copy is a distinct family after relabelling
    CHECK(run.replicates[r][0] == 3.0);
  }
  CHECK(family_bootstrap(p, count, o).draws == run.draws);
}

TEST_CASE("relabelled copies of a family stay distinct") {
  const Panel p = three_families();
  const std::vector<std::string> fams{"A", "B", "C"};
  const Panel rep = assemble_replicate(p, fams, {0, 0, 2}, false);
  const auto ids = rep.family_ids();
  CHECK(ids.size() == 3);
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == 3);
  CHECK(rep.size() == 6);
}

TEST_CASE("percentile interval") {
  std::vector<double> v(1000);
  for (int i = 0; i < 1000; ++i) v[i] = 1000 - i;
  const auto [lo, hi] = percentile_interval(v, 0.95);
  CHECK(lo == 25.0);
  CHECK(hi == 975.0);

  const Statistic constant = [](const Panel&) { return std::vector<double>{0.42}; };
  BootstrapOptions o;
  o.reps = 50;
  const auto run = family_bootstrap(three_families(), constant, o);
  CHECK(run.ci(0).first == 0.42);
  CHECK(run.ci(0).second == 0.42);
}

TEST_CASE("preconditions") {
  const Statistic s = [](const Panel&) { return std::vector<double>{1.0}; };
  BootstrapOptions o;
  o.reps = 0;
  CHECK_THROWS_AS(family_bootstrap(three_families(), s, o), ValidationError);
  o.reps = 10;
  o.ci_level = 1.0;
  CHECK_THROWS_AS(family_bootstrap(three_families(), s, o), ValidationError);
  o.ci_level = 0.9;
  const Panel one(OrdinalScale::likert5(), {treated("a", "A", 1, 1), treated("b", "A", 2, 2)});
  CHECK_THROWS_AS(family_bootstrap(one, s, o), ValidationError);
}

TEST_CASE("failing replicates are counted, not dropped silently") {
  const Statistic flaky = [](const Panel& x) -> std::vector<double> {
    bool has_a = false;
    for (const auto& r : x.records()) has_a = has_a || r.family_id.rfind("A#", 0) == 0;
    if (!has_a) throw std::runtime_error("family A missing");
    return {1.0};
  };
  BootstrapOptions o;
  o.reps = 40;
  const auto run = family_bootstrap(three_families(), flaky, o);
  CHECK(run.failures.size() > 0);
  CHECK(run.failures.size() + run.replicates.size() == 40);
  CHECK(run.failures.front().reason.find("family A missing") != std::string::npos);
  CHECK(run.replicate_index.size() == run.replicates.size());
}

TEST_CASE("parallel and serial runs are bit-identical") {
  const auto sim = generate_panel(small_config(3));
  const Statistic betas = [](const Panel& x) { return fit_category_system(x, "Q1").betas; };
  BootstrapOptions o;
  o.reps = 40;
  o.seed = 99;
  const auto serial = family_bootstrap_serial(sim.panel, betas, o);
  for (int threads : {1, 2, 4}) {
    o.threads = threads;
    const auto par = family_bootstrap(sim.panel, betas, o);
    CHECK(par.replicates == serial.replicates);
    CHECK(par.draws == serial.draws);
  }
}

TEST_CASE("held reference records are not resampled") {
  std::vector<RespondentRecord> recs = three_families().records();
  recs.push_back(reference("r1", "R1", 3));
  recs.push_back(reference("r2", "R2", 4));
  const Panel p(OrdinalScale::likert5(), recs);
  CHECK(resampling_families(p, true).size() == 3);
  CHECK(resampling_families(p, false).size() == 5);
  const Statistic refs = [](const Panel& x) {
    std::vector<double> v;
    for (const auto* r : x.select("Q1", Group::reference)) v.push_back(r->response);
    return v;
  };
  BootstrapOptions o;
  o.reps = 20;
  o.hold_reference = true;
  const auto run = family_bootstrap(p, refs, o);
  for (const auto& rep : run.replicates) CHECK(rep == std::vector<double>{3.0, 4.0});
}

TEST_CASE("consistency draws sit at the identity values") {
  const auto sim = generate_panel(small_config(4));
  BootstrapOptions o;
  o.reps = 30;
  const auto d = consistency_distributions(sim.panel, "Q1", o);
  REQUIRE(d.sum_betas.size() == 30);
  for (std::size_t i = 0; i < d.sum_betas.size(); ++i) {
    CHECK(std::abs(d.sum_betas[i]) < 1e-8);
    CHECK(std::abs(d.sum_fe[i] - 1.0) < 1e-8);
  }
  o.reps = 0;
  CHECK_THROWS_AS(consistency_distributions(sim.panel, "Q1", o), ValidationError);
}
