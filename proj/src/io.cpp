#include "distconv/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "distconv/errors.hpp"

namespace distconv {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ValidationError("unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool getline_clean(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

int parse_int(const std::string& s, const char* what) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) {
    throw ValidationError(std::string(what) + " '" + s + "' is not an integer");
  }
  return v;
}

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty() || !std::isfinite(v)) {
    throw ValidationError(std::string(what) + " '" + s + "' is not a finite number");
  }
  return v;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path out(p);
  if (out.is_relative() && !base.empty()) out = (base / out).lexically_normal();
  return out;
}

IntRange range_from_json(const json& j) {
  if (j.is_array()) {
    if (j.size() != 2) throw ValidationError("integer range must be [min, max]");
    return IntRange{j[0].get<int>(), j[1].get<int>()};
  }
  return IntRange{j.at("min").get<int>(), j.at("max").get<int>()};
}

ordered_json range_to_json(const IntRange& r) { return ordered_json{{"min", r.lo}, {"max", r.hi}}; }

}  // namespace

std::string format_full(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

OrdinalScale RunConfig::scale() const {
  return scale_labels.empty() ? OrdinalScale::likert5() : OrdinalScale(scale_labels);
}

void RunConfig::validate() const {
  const OrdinalScale s = scale();
  for (int c : binarized_codes) {
    if (!s.contains(c)) throw ValidationError("binarized code " + std::to_string(c) + " outside the scale");
  }
  if (!binarized_codes.empty() && binarized_codes.size() >= s.size()) {
    throw ValidationError("binarized codes must be a proper subset of the scale");
  }
  for (const auto& cc : collapsed) {
    if (cc.codes.empty()) throw ValidationError("collapsed category '" + cc.name + "' has no codes");
    for (int c : cc.codes) {
      if (!s.contains(c)) throw ValidationError("collapsed code " + std::to_string(c) + " outside the scale");
    }
  }
  if (format != "tsv" && format != "json") throw ValidationError("format must be tsv or json");
  if (!(bootstrap.ci_level > 0.0 && bootstrap.ci_level < 1.0)) {
    throw ValidationError("ci level must lie in (0, 1)");
  }
  if (bootstrap.threads < 0) throw ValidationError("threads must be >= 0");
  WaveOrder check(waves);
  (void)check;
  if (synthetic) synthetic->validate();
}

SyntheticConfig synthetic_from_json(const json& j) {
  SyntheticConfig c;
  c.n_families = j.value("n_families", c.n_families);
  if (j.contains("siblings")) c.siblings = range_from_json(j["siblings"]);
  c.true_betas = j.at("true_betas").get<std::vector<double>>();
  c.effect_center = j.at("effect_center").get<std::vector<double>>();
  c.effect_spread = j.value("effect_spread", c.effect_spread);
  if (j.contains("first_arrival_age")) c.first_arrival_age = range_from_json(j["first_arrival_age"]);
  if (j.contains("birth_gap")) c.birth_gap = range_from_json(j["birth_gap"]);
  c.confounding = j.value("confounding", c.confounding);
  c.confounding_direction = j.value("confounding_direction", c.confounding_direction);
  c.reference_distribution = j.at("reference_distribution").get<std::vector<double>>();
  c.n_reference_families = j.value("n_reference_families", c.n_reference_families);
  if (j.contains("reference_siblings")) c.reference_siblings = range_from_json(j["reference_siblings"]);
  c.questions = j.value("questions", c.questions);
  c.countries = j.value("countries", c.countries);
  c.wave = j.value("wave", c.wave);
  c.seed = j.value("seed", c.seed);
  return c;
}

ordered_json synthetic_to_json(const SyntheticConfig& c) {
  ordered_json j;
  j["n_families"] = c.n_families;
  j["siblings"] = range_to_json(c.siblings);
  j["true_betas"] = c.true_betas;
  j["effect_center"] = c.effect_center;
  j["effect_spread"] = c.effect_spread;
  j["first_arrival_age"] = range_to_json(c.first_arrival_age);
  j["birth_gap"] = range_to_json(c.birth_gap);
  j["confounding"] = c.confounding;
  j["confounding_direction"] = c.confounding_direction;
  j["reference_distribution"] = c.reference_distribution;
  j["n_reference_families"] = c.n_reference_families;
  j["reference_siblings"] = range_to_json(c.reference_siblings);
  j["questions"] = c.questions;
  j["countries"] = c.countries;
  j["wave"] = c.wave;
  j["seed"] = c.seed;
  return j;
}

RunConfig config_from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  static const std::set<std::string> known = {
      "scale", "waves", "questions", "controls", "bootstrap", "binarized_codes", "collapsed", "data",
      "heterogeneity", "format", "out_dir", "synthetic"};
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("config: unknown key '" + key + "'");
  }
  try {
    c.scale_labels = j.value("scale", c.scale_labels);
    c.waves = j.value("waves", c.waves);
    c.questions = j.value("questions", c.questions);
    if (j.contains("controls")) {
      std::string csv;
      for (const auto& s : j["controls"]) csv += s.get<std::string>() + ",";
      c.controls = parse_controls(csv);
    }
    if (j.contains("bootstrap")) {
      const auto& b = j["bootstrap"];
      c.bootstrap.reps = b.value("reps", c.bootstrap.reps);
      c.bootstrap.seed = b.value("seed", c.bootstrap.seed);
      c.bootstrap.ci_level = b.value("ci", c.bootstrap.ci_level);
      c.bootstrap.hold_reference = b.value("hold_reference", c.bootstrap.hold_reference);
      c.bootstrap.threads = b.value("threads", c.bootstrap.threads);
    }
    if (j.contains("binarized_codes")) c.binarized_codes = j["binarized_codes"].get<std::set<int>>();
    if (j.contains("collapsed")) {
      for (const auto& e : j["collapsed"]) {
        c.collapsed.push_back({e.at("name").get<std::string>(), e.at("codes").get<std::set<int>>()});
      }
    }
    if (j.contains("data")) c.data = resolve(base_dir, j["data"].get<std::string>());
    if (j.contains("heterogeneity")) {
      const auto& h = j["heterogeneity"];
      const std::string rule = h.value("rule", std::string("regions"));
      if (rule == "regions") {
        c.split = SplitRule::regions;
      } else if (rule == "median-distance") {
        c.split = SplitRule::median_distance;
      } else {
        throw ValidationError("heterogeneity rule must be 'regions' or 'median-distance'");
      }
      if (h.contains("regions_file")) c.regions = resolve(base_dir, h["regions_file"].get<std::string>());
      if (h.contains("countries_file")) c.countries = resolve(base_dir, h["countries_file"].get<std::string>());
      c.selected_regions = h.value("regions", c.selected_regions);
      c.reference_country = h.value("reference_country", c.reference_country);
    }
    c.format = j.value("format", c.format);
    if (j.contains("out_dir")) c.out_dir = resolve(base_dir, j["out_dir"].get<std::string>());
    if (j.contains("synthetic")) c.synthetic = synthetic_from_json(j["synthetic"]);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  auto in = open_input(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["scale"] = scale().labels();
  j["waves"] = waves;
  j["questions"] = questions;
  std::vector<std::string> ctl;
  {
    std::stringstream ss(distconv::to_string(controls));
    std::string item;
    while (std::getline(ss, item, ',')) ctl.push_back(item);
  }
  j["controls"] = ctl;
  j["bootstrap"] = {{"reps", bootstrap.reps},
                    {"seed", bootstrap.seed},
                    {"ci", bootstrap.ci_level},
                    {"hold_reference", bootstrap.hold_reference}};
  j["binarized_codes"] = binarized_codes;
  ordered_json coll = ordered_json::array();
  for (const auto& cc : collapsed) coll.push_back({{"name", cc.name}, {"codes", cc.codes}});
  j["collapsed"] = coll;
  j["data"] = data ? ordered_json(data->generic_string()) : ordered_json(nullptr);
  j["heterogeneity"] = {{"rule", split == SplitRule::regions ? "regions" : "median-distance"},
                        {"regions_file", regions ? ordered_json(regions->generic_string()) : ordered_json(nullptr)},
                        {"countries_file", countries ? ordered_json(countries->generic_string()) : ordered_json(nullptr)},
                        {"regions", selected_regions},
                        {"reference_country", reference_country}};
  j["format"] = format;
  j["standard_errors"] = "family-clustered CR1: G/(G-1) * (N-1)/(N-k)";
  if (synthetic) j["synthetic"] = synthetic_to_json(*synthetic);
  return j;
}

Panel read_respondents(std::istream& in, const OrdinalScale& scale, const WaveOrder& waves,
                       const std::string& source) {
  std::string line;
  if (!getline_clean(in, line)) throw ValidationError(source + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  const std::vector<std::string> short_header(kRespondentHeader.begin(), kRespondentHeader.end() - 1);
  if (header != kRespondentHeader && header != short_header) {
    std::string expected;
    for (const auto& h : kRespondentHeader) expected += (expected.empty() ? "" : ",") + h;
    throw ValidationError(source + ":1: header must be exactly '" + expected +
                          "' (country_code optional)");
  }
  const std::size_t width = header.size();

  std::vector<RespondentRecord> records;
  std::vector<std::string> errors;
  std::size_t lineno = 1;
  while (getline_clean(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    try {
      const auto f = split_csv_line(line);
      if (f.size() != width) {
        throw ValidationError("expected " + std::to_string(width) + " fields, got " +
                              std::to_string(f.size()));
      }
      RespondentRecord r;
      r.person_id = f[0];
      r.family_id = f[1];
      r.group = group_from_string(f[2]);
      r.question_id = f[3];
      // numeric code, or a label mapped through the scale codebook
      int code = 0;
      const auto* end = f[4].data() + f[4].size();
      auto [p, ec] = std::from_chars(f[4].data(), end, code);
      r.response = (ec == std::errc() && p == end && !f[4].empty()) ? code : scale.code_of(f[4]);
      if (!f[5].empty()) r.treatment = parse_double(f[5], "mig_age");
      r.sex = parse_int(f[6], "sex");
      r.oldest = parse_int(f[7], "oldest");
      r.age_at_interview = parse_int(f[8], "age_at_interview");
      r.wave = f[9];
      if (!waves.waves().empty() && !waves.contains(r.wave)) throw ValidationError("wave '" + r.wave + "' missing from wave order");
      if (width == kRespondentHeader.size() && !f[10].empty()) r.country_code = f[10];
      validate_record(r, scale);
      records.push_back(std::move(r));
    } catch (const ValidationError& e) {
      errors.push_back(where + ": " + e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = std::to_string(errors.size()) + " invalid row(s):";
    for (std::size_t i = 0; i < errors.size() && i < 20; ++i) msg += "\n  " + errors[i];
    if (errors.size() > 20) msg += "\n  ...";
    throw ValidationError(msg);
  }
  if (!waves.waves().empty()) return dedupe_most_recent(Panel(scale, std::move(records)), waves);
  // no configured order: waves rank in lexicographic order
  std::set<std::string> seen;
  for (const auto& r : records) seen.insert(r.wave);
  const WaveOrder derived(std::vector<std::string>(seen.begin(), seen.end()));
  return dedupe_most_recent(Panel(scale, std::move(records)), derived);
}

Panel load_respondents(const fs::path& path, const RunConfig& config) {
  auto in = open_input(path);
  return read_respondents(in, config.scale(), WaveOrder(config.waves), path.string());
}

void write_respondents(std::ostream& out, const Panel& panel) {
  for (std::size_t i = 0; i < kRespondentHeader.size(); ++i) {
    out << (i ? "," : "") << kRespondentHeader[i];
  }
  out << '\n';
  for (const auto& r : panel.records()) {
    out << csv_field(r.person_id) << ',' << csv_field(r.family_id) << ',' << to_string(r.group) << ','
        << csv_field(r.question_id) << ',' << r.response << ','
        << (r.treatment ? format_full(*r.treatment) : "") << ',' << r.sex << ',' << r.oldest << ','
        << r.age_at_interview << ',' << csv_field(r.wave) << ','
        << (r.country_code ? csv_field(*r.country_code) : "") << '\n';
  }
}

CountryTable read_country_table(std::istream& in, const std::string& reference,
                                const std::string& source) {
  std::string line;
  if (!getline_clean(in, line)) throw ValidationError(source + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "country_code") {
    throw ValidationError(source + ":1: header must be 'country_code' followed by item columns");
  }
  CountryTable t;
  t.reference = reference;
  t.items.assign(header.begin() + 1, header.end());
  std::size_t lineno = 1;
  while (getline_clean(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw ValidationError(where + ": wrong number of fields");
    std::vector<double> means;
    for (std::size_t i = 1; i < f.size(); ++i) {
      try {
        means.push_back(parse_double(f[i], "mean"));
      } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
      }
    }
    if (!t.means.emplace(f[0], std::move(means)).second) {
      throw ValidationError(where + ": duplicate country '" + f[0] + "'");
    }
  }
  if (!t.means.count(reference)) {
    throw ValidationError(source + ": reference country '" + reference + "' has no row");
  }
  return t;
}

CountryTable load_country_table(const fs::path& path, const std::string& reference) {
  auto in = open_input(path);
  return read_country_table(in, reference, path.string());
}

std::map<std::string, std::string> read_region_map(std::istream& in, const std::string& source) {
  std::string line;
  if (!getline_clean(in, line)) throw ValidationError(source + ": empty file");
  if (split_csv_line(line) != std::vector<std::string>{"country_code", "region"}) {
    throw ValidationError(source + ":1: header must be 'country_code,region'");
  }
  std::map<std::string, std::string> out;
  std::size_t lineno = 1;
  while (getline_clean(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const std::string where = source + ":" + std::to_string(lineno);
    if (f.size() != 2) throw ValidationError(where + ": expected 2 fields");
    if (!out.emplace(f[0], f[1]).second) throw ValidationError(where + ": duplicate country '" + f[0] + "'");
  }
  return out;
}

std::map<std::string, std::string> load_region_map(const fs::path& path) {
  auto in = open_input(path);
  return read_region_map(in, path.string());
}

}  // namespace distconv
