#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "distconv/errors.hpp"
#include "distconv/io.hpp"
#include "distconv/synthgen.hpp"

using namespace distconv;

namespace {
const std::string kHeader =
    "person_id,family_id,group,question_id,response_code,mig_age,sex,oldest,age_at_interview,wave,country_code\n";

Panel parse(const std::string& body, std::vector<std::string> waves = {}) {
  std::istringstream in(kHeader + body);
  return read_respondents(in, OrdinalScale::likert5(), WaveOrder(std::move(waves)), "t.csv");
}

std::string error_of(const std::string& body) {
  try {
    parse(body);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}
}  // namespace

TEST_CASE("six-row fixture") {
  RunConfig cfg;
  const Panel p = load_respondents(DISTCONV_SOURCE_DIR "/tests/fixtures/six_rows.csv", cfg);
  CHECK(p.size() == 6);
  CHECK(p.family_ids() == std::vector<std::string>{"F1", "R1"});
  CHECK(p.records()[1].treatment == 1.5);
  CHECK(p.records()[4].response == 2);  // label input
  CHECK(p.records()[0].country_code == "PL");
  CHECK_FALSE(p.records()[3].country_code.has_value());
}

TEST_CASE("row errors carry line numbers") {
  auto e = error_of("r1,R,reference,Q1,3,4.0,0,0,30,a,\n");
  CHECK(e.find("t.csv:2") != std::string::npos);
  CHECK(e.find("mig_age") != std::string::npos);
  e = error_of("a,F,treated,Q1,3,2,0,0,30,a,\nb,F,treated,Q1,9,2,0,0,30,a,\nc,F,treated,Q1,3,,0,0,30,a,\n");
  CHECK(e.find("t.csv:3") != std::string::npos);
  CHECK(e.find("t.csv:4") != std::string::npos);
  CHECK(error_of("a,F,treated,Q1,3,2,0,0,30,a,\na,F,treated,Q1,4,2,0,0,30,a,\n").find("duplicate") !=
        std::string::npos);
  CHECK_FALSE(error_of("a,F,treated,Q1,3,2,0,0,thirty,a,\n").empty());

  std::istringstream bad("person,family\n");
  CHECK_THROWS_AS(read_respondents(bad, OrdinalScale::likert5(), WaveOrder{}), ValidationError);
}

TEST_CASE("most recent wave wins on load") {
  const Panel p = parse("a,F,treated,Q1,3,2,0,0,30,d,\na,F,treated,Q1,4,2,0,0,30,j,\n", {"b", "d", "j"});
  REQUIRE(p.size() == 1);
  CHECK(p.records()[0].response == 4);
  CHECK_THROWS_AS(parse("a,F,treated,Q1,3,2,0,0,30,z,\n", {"b"}), ValidationError);
}

TEST_CASE("optional country column") {
  std::istringstream in(
      "person_id,family_id,group,question_id,response_code,mig_age,sex,oldest,age_at_interview,wave\n"
      "a,F,treated,Q1,3,2,0,0,30,a\n");
  const Panel p = read_respondents(in, OrdinalScale::likert5(), WaveOrder{});
  CHECK(p.size() == 1);
  CHECK(split_csv_line("a,\"b,c\",\"d\"\"e\"") == std::vector<std::string>{"a", "b,c", "d\"e"});
}

TEST_CASE("canonical writer round-trips") {
  SyntheticConfig c;
  c.n_families = 30;
  c.n_reference_families = 20;
  c.true_betas = {.01, 0, 0, 0, -.01};
  c.effect_center = {.2, .2, .2, .2, .2};
  c.reference_distribution = {.1, .2, .4, .2, .1};
  c.countries = {"PL", "IN"};
  const auto sim = generate_panel(c);
  std::ostringstream out;
  write_respondents(out, sim.panel);
  std::istringstream in(out.str());
  const Panel back = read_respondents(in, sim.panel.scale(), WaveOrder({"a"}));
  CHECK(back == sim.panel);
}

TEST_CASE("country table and region map") {
  std::istringstream ct("country_code,i1,i2\nUK,1,2\nPL,2,2\nIN,1,4\n");
  const auto t = read_country_table(ct, "UK");
  CHECK(t.items.size() == 2);
  CHECK(t.distance_to_reference("PL") == doctest::Approx(1.0));
  CHECK(t.distance_to_reference("IN") == doctest::Approx(2.0));
  std::istringstream no_ref("country_code,i1\nPL,2\n");
  CHECK_THROWS_AS(read_country_table(no_ref, "UK"), ValidationError);
  std::istringstream bad("country_code,i1\nUK,x\n");
  CHECK_THROWS_AS(read_country_table(bad, "UK"), ValidationError);

  std::istringstream rm("country_code,region\nPL,Europe\nUS,North America\n");
  const auto m = read_region_map(rm);
  CHECK(m.at("US") == "North America");
}

TEST_CASE("config parsing") {
  const auto j = nlohmann::json::parse(R"({
    "questions": ["Q2"],
    "controls": ["oldest", "sex"],
    "bootstrap": {"reps": 50, "seed": 3, "ci": 0.9, "hold_reference": true},
    "binarized_codes": [1, 2],
    "collapsed": [{"name": "agree", "codes": [1, 2]}],
    "data": "panel.csv",
    "heterogeneity": {"rule": "median-distance", "countries_file": "c.csv"},
    "format": "json"
  })");
  const auto c = config_from_json(j, "/cfg");
  CHECK(c.questions == std::vector<std::string>{"Q2"});
  CHECK(c.controls.oldest);
  CHECK(c.bootstrap.reps == 50);
  CHECK(c.bootstrap.hold_reference);
  CHECK(c.data == std::filesystem::path("/cfg/panel.csv"));
  CHECK(c.split == SplitRule::median_distance);
  CHECK(c.format == "json");
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"format": "xml"})")).validate(), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"bootstrap": {"ci": 1.5}})")).validate(),
                  ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"unknown_key": 1})")), ValidationError);
}

TEST_CASE("number formatting") {
  CHECK(format_full(0.1) == "0.1");
  CHECK(format_short(0.14834567) == "0.148346");
  CHECK(format_full(std::numeric_limits<double>::quiet_NaN()) == "nan");
}
