#include "distconv/ordinal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "distconv/errors.hpp"

namespace distconv {

OrdinalScale::OrdinalScale(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) throw ValidationError("ordinal scale needs at least 2 categories");
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) throw ValidationError("duplicate scale label '" + l + "'");
  }
}

OrdinalScale OrdinalScale::with_size(std::size_t k) {
  std::vector<std::string> labels;
  for (std::size_t i = 1; i <= k; ++i) labels.push_back(std::to_string(i));
  return OrdinalScale(std::move(labels));
}

OrdinalScale OrdinalScale::likert5() {
  return OrdinalScale({"Strongly Agree", "Agree", "Neither Agree nor Disagree", "Disagree",
                       "Strongly Disagree"});
}

const std::string& OrdinalScale::label(int code) const {
  if (!contains(code)) throw ValidationError("code " + std::to_string(code) + " not on scale");
  return labels_[static_cast<std::size_t>(code - 1)];
}

int OrdinalScale::code_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ValidationError("label '" + label + "' not in codebook");
  return static_cast<int>(it - labels_.begin()) + 1;
}

ResponseDistribution::ResponseDistribution(OrdinalScale scale, std::vector<double> probs)
    : scale_(std::move(scale)), probs_(std::move(probs)), proper_(true) {
  if (probs_.size() != scale_.size()) {
    throw ValidationError("distribution has " + std::to_string(probs_.size()) +
                          " entries for a scale of " + std::to_string(scale_.size()));
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p)) throw ValidationError("non-finite probability");
    total += p;
    if (p < 0.0 || p > 1.0) proper_ = false;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw ValidationError("probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

std::vector<double> ResponseDistribution::cdf() const {
  std::vector<double> out(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), out.begin());
  return out;
}

double ResponseDistribution::mean_code() const {
  double m = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) m += static_cast<double>(i + 1) * probs_[i];
  return m;
}

const char* to_string(Group g) { return g == Group::treated ? "treated" : "reference"; }

Group group_from_string(const std::string& s) {
  if (s == "treated") return Group::treated;
  if (s == "reference") return Group::reference;
  throw ValidationError("group must be 'treated' or 'reference', got '" + s + "'");
}

void validate_record(const RespondentRecord& r, const OrdinalScale& scale,
                     const std::string& context) {
  auto fail = [&](const std::string& msg) {
    throw ValidationError(context.empty() ? msg : context + ": " + msg);
  };
  if (r.person_id.empty()) fail("empty person_id");
  if (r.family_id.empty()) fail("empty family_id");
  if (r.question_id.empty()) fail("empty question_id");
  if (!scale.contains(r.response)) {
    fail("response code " + std::to_string(r.response) + " outside 1.." +
         std::to_string(scale.size()));
  }
  if (r.group == Group::treated) {
    if (!r.treatment) fail("treated record without treatment (mig_age)");
    if (!std::isfinite(*r.treatment) || *r.treatment < 0.0) fail("treatment must be finite and >= 0");
  } else if (r.treatment) {
    fail("reference record carries a treatment (mig_age)");
  }
  if (r.sex != 0 && r.sex != 1) fail("sex must be 0 or 1");
  if (r.oldest != 0 && r.oldest != 1) fail("oldest must be 0 or 1");
}

WaveOrder::WaveOrder(std::vector<std::string> waves) : waves_(std::move(waves)) {
  for (std::size_t i = 0; i < waves_.size(); ++i) {
    if (!ranks_.emplace(waves_[i], static_cast<int>(i)).second) {
      throw ValidationError("wave '" + waves_[i] + "' listed twice in wave order");
    }
  }
}

int WaveOrder::rank(const std::string& wave) const {
  auto it = ranks_.find(wave);
  if (it == ranks_.end()) throw ValidationError("wave '" + wave + "' missing from wave order");
  return it->second;
}

Panel::Panel(OrdinalScale scale, std::vector<RespondentRecord> records)
    : scale_(std::move(scale)), records_(std::move(records)) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    validate_record(records_[i], scale_, "record " + std::to_string(i));
    if (seen.insert(records_[i].question_id).second) questions_.push_back(records_[i].question_id);
  }
}

bool Panel::has_question(const std::string& q) const {
  return std::find(questions_.begin(), questions_.end(), q) != questions_.end();
}

std::vector<std::string> Panel::family_ids() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : records_) {
    if (seen.insert(r.family_id).second) out.push_back(r.family_id);
  }
  return out;
}

std::vector<const RespondentRecord*> Panel::select(const std::string& question,
                                                   std::optional<Group> group) const {
  std::vector<const RespondentRecord*> out;
  for (const auto& r : records_) {
    if (r.question_id == question && (!group || r.group == *group)) out.push_back(&r);
  }
  return out;
}

Panel dedupe_most_recent(const Panel& panel, const WaveOrder& waves) {
  // (person, question) -> index of the kept record
  std::map<std::pair<std::string, std::string>, std::size_t> keep;
  std::set<std::tuple<std::string, std::string, std::string>> triples;
  const auto& recs = panel.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    if (!triples.emplace(r.person_id, r.question_id, r.wave).second) {
      throw ValidationError("duplicate record for person '" + r.person_id + "', question '" +
                            r.question_id + "', wave '" + r.wave + "'");
    }
    const int rank = waves.rank(r.wave);
    auto [it, inserted] = keep.emplace(std::make_pair(r.person_id, r.question_id), i);
    if (!inserted && waves.rank(recs[it->second].wave) < rank) it->second = i;
  }
  std::vector<std::size_t> idx;
  idx.reserve(keep.size());
  for (const auto& [key, i] : keep) idx.push_back(i);
  std::sort(idx.begin(), idx.end());
  std::vector<RespondentRecord> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(recs[i]);
  return Panel(panel.scale(), std::move(out));
}

ResponseDistribution empirical_distribution(const OrdinalScale& scale,
                                            std::span<const RespondentRecord* const> records) {
  if (records.empty()) throw ValidationError("empty group: no records to tabulate");
  std::vector<std::size_t> counts(scale.size(), 0);
  for (const auto* r : records) counts[static_cast<std::size_t>(r->response - 1)]++;
  const double n = static_cast<double>(records.size());
  std::vector<double> probs(scale.size());
  for (std::size_t a = 0; a < counts.size(); ++a) probs[a] = static_cast<double>(counts[a]) / n;
  return ResponseDistribution(scale, std::move(probs));
}

ResponseDistribution empirical_distribution(const Panel& panel, const std::string& question,
                                            Group group) {
  auto recs = panel.select(question, group);
  if (recs.empty()) {
    throw ValidationError(std::string("empty group: no ") + to_string(group) +
                          " records for question '" + question + "'");
  }
  return empirical_distribution(panel.scale(), recs);
}

}  // namespace distconv
