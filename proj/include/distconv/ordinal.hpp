#pragma once

// Shared domain types: ordinal scales, response distributions, respondent
// panels and the per-category system fit.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace distconv {

inline constexpr double kSumTolerance = 1e-9;

/// Ordered answer space. Codes are 1..K in label order; code 1 is the
/// strongest agreement.
class OrdinalScale {
 public:
  explicit OrdinalScale(std::vector<std::string> labels);

  /// Scale with generic labels "1".."K".
  static OrdinalScale with_size(std::size_t k);
  /// The five-point Likert scale, Strongly Agree (1) .. Strongly Disagree (5).
  static OrdinalScale likert5();

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int code) const;
  bool contains(int code) const { return code >= 1 && code <= static_cast<int>(size()); }
  /// Code for a label; throws ValidationError when absent.
  int code_of(const std::string& label) const;

  friend bool operator==(const OrdinalScale&, const OrdinalScale&) = default;

 private:
  std::vector<std::string> labels_;
};

/// Probability vector over an ordinal scale. Entries always sum to 1 within
/// kSumTolerance; `proper()` is true when every entry also lies in [0, 1].
/// Model-implied distributions may be improper and are never clipped.
class ResponseDistribution {
 public:
  ResponseDistribution(OrdinalScale scale, std::vector<double> probs);

  const OrdinalScale& scale() const { return scale_; }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t size() const { return probs_.size(); }
  bool proper() const { return proper_; }
  /// Cumulative shares F(k) for k = 1..K.
  std::vector<double> cdf() const;
  /// Sum of code * prob.
  double mean_code() const;

 private:
  OrdinalScale scale_;
  std::vector<double> probs_;
  bool proper_;
};

enum class Group { treated, reference };

const char* to_string(Group g);
Group group_from_string(const std::string& s);

struct RespondentRecord {
  std::string person_id;
  std::string family_id;
  Group group = Group::treated;
  std::string question_id;
  int response = 0;
  std::optional<double> treatment;  // migration age; present iff treated
  int sex = 0;
  int oldest = 0;
  int age_at_interview = 0;
  std::string wave;
  std::optional<std::string> country_code;

  friend bool operator==(const RespondentRecord&, const RespondentRecord&) = default;
};

/// Checks the record-level invariants against a scale. Throws
/// ValidationError with `context` prefixed to the message.
void validate_record(const RespondentRecord& r, const OrdinalScale& scale,
                     const std::string& context = {});

/// Ordered wave labels, earliest first. Unknown waves are an error: there is
/// no lexicographic fallback here (loaders may derive one).
class WaveOrder {
 public:
  WaveOrder() = default;
  explicit WaveOrder(std::vector<std::string> waves);
  int rank(const std::string& wave) const;
  bool contains(const std::string& wave) const { return ranks_.count(wave) > 0; }
  const std::vector<std::string>& waves() const { return waves_; }

 private:
  std::vector<std::string> waves_;
  std::map<std::string, int> ranks_;
};

class Panel {
 public:
  Panel(OrdinalScale scale, std::vector<RespondentRecord> records);

  const OrdinalScale& scale() const { return scale_; }
  const std::vector<RespondentRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  /// Question ids in order of first appearance.
  const std::vector<std::string>& questions() const { return questions_; }
  bool has_question(const std::string& q) const;
  /// Distinct family ids in order of first appearance.
  std::vector<std::string> family_ids() const;

  /// Records for one question, optionally restricted to one group.
  std::vector<const RespondentRecord*> select(const std::string& question,
                                              std::optional<Group> group = {}) const;

  friend bool operator==(const Panel& a, const Panel& b) {
    return a.scale_ == b.scale_ && a.records_ == b.records_;
  }

 private:
  OrdinalScale scale_;
  std::vector<RespondentRecord> records_;
  std::vector<std::string> questions_;
};

/// Keeps, for every (person, question), the record from the latest wave.
/// Two records with the same (person, question, wave) are an error.
Panel dedupe_most_recent(const Panel& panel, const WaveOrder& waves);

/// Observed shares of each response code among (question, group).
ResponseDistribution empirical_distribution(const Panel& panel, const std::string& question,
                                            Group group);

/// Shares over an explicit record subset.
ResponseDistribution empirical_distribution(const OrdinalScale& scale,
                                            std::span<const RespondentRecord* const> records);

/// Per-category LPM system for one question: slopes, family intercepts and
/// clustered SEs. `control_betas[a]` holds the control coefficients of the
/// category-a regression, and `person_controls` the control row of every
/// person used in the fit (both empty without controls).
struct CategorySystemFit {
  std::string question_id;
  std::vector<double> betas;
  std::map<std::string, std::vector<double>> family_effects;
  std::vector<double> cluster_se;
  std::vector<std::string> control_names;
  std::vector<std::vector<double>> control_betas;
  std::map<std::string, std::vector<double>> person_controls;
  std::map<std::string, std::string> person_family;
  std::vector<int> degenerate_categories;
  std::vector<std::string> dropped_columns;
  std::vector<std::string> dropped_families;
  std::size_t n_obs = 0;
  std::size_t n_families = 0;
};

}  // namespace distconv
