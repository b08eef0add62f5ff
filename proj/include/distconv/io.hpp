#pragma once

// File formats: respondent CSV, country-means CSV, region map CSV and the
// JSON run configuration.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "distconv/estimands.hpp"
#include "distconv/fe_lpm.hpp"
#include "distconv/ordinal.hpp"
#include "distconv/resampling.hpp"
#include "distconv/synthgen.hpp"

#include "json.hpp"

namespace distconv {

inline const std::vector<std::string> kRespondentHeader = {
    "person_id", "family_id", "group", "question_id", "response_code", "mig_age",
    "sex", "oldest", "age_at_interview", "wave", "country_code"};

/// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(const std::string& line);

struct CollapsedCategory {
  std::string name;
  std::set<int> codes;
};

struct RunConfig {
  std::vector<std::string> scale_labels;  // empty: Likert 5
  std::vector<std::string> waves;
  std::vector<std::string> questions;     // empty: every question in the data
  Controls controls;
  BootstrapOptions bootstrap;
  std::set<int> binarized_codes;          // empty: {1, 2, 3} on 5-point scales
  std::vector<CollapsedCategory> collapsed;
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> countries;
  std::optional<std::filesystem::path> regions;
  SplitRule split = SplitRule::regions;
  std::vector<std::string> selected_regions;
  std::string reference_country = "UK";
  std::string format = "tsv";
  std::filesystem::path out_dir = "out";
  std::optional<SyntheticConfig> synthetic;

  OrdinalScale scale() const;
  /// Fills scale-dependent defaults and checks every field.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

/// Reads a JSON config; relative paths resolve against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
SyntheticConfig synthetic_from_json(const nlohmann::json& j);
nlohmann::ordered_json synthetic_to_json(const SyntheticConfig& c);

/// Parses and validates a respondent CSV, then keeps the most recent wave
/// per (person, question). Row errors are collected and reported together
/// with their line numbers. An empty wave order ranks waves lexicographically.
Panel read_respondents(std::istream& in, const OrdinalScale& scale, const WaveOrder& waves,
                       const std::string& source = "<stream>");
Panel load_respondents(const std::filesystem::path& path, const RunConfig& config);

/// Canonical writer; read_respondents(write_respondents(p)) == p for a
/// deduplicated panel.
void write_respondents(std::ostream& out, const Panel& panel);

CountryTable read_country_table(std::istream& in, const std::string& reference,
                                const std::string& source = "<stream>");
CountryTable load_country_table(const std::filesystem::path& path, const std::string& reference);

std::map<std::string, std::string> read_region_map(std::istream& in,
                                                   const std::string& source = "<stream>");
std::map<std::string, std::string> load_region_map(const std::filesystem::path& path);

/// Shortest round-trip decimal for a double.
std::string format_full(double v);
/// Six significant digits.
std::string format_short(double v);

}  // namespace distconv
