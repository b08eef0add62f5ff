#include "distconv/estimands.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "distconv/distance.hpp"
#include "distconv/errors.hpp"

namespace distconv {

ResponseDistribution counterfactual_distribution(const CategorySystemFit& fit,
                                                 const OrdinalScale& scale,
                                                 std::span<const std::string> persons) {
  const std::size_t k = scale.size();
  if (fit.betas.size() != k) throw ValidationError("fit and scale disagree on category count");
  if (persons.empty()) throw ValidationError("counterfactual population is empty");

  std::vector<std::string> uncovered;
  std::vector<double> probs(k, 0.0);
  for (const auto& person : persons) {
    auto pf = fit.person_family.find(person);
    if (pf == fit.person_family.end()) {
      uncovered.push_back(person);
      continue;
    }
    const auto& gamma = fit.family_effects.at(pf->second);
    const auto pc = fit.person_controls.find(person);
    for (std::size_t a = 0; a < k; ++a) {
      double v = gamma[a];
      if (pc != fit.person_controls.end()) {
        for (std::size_t j = 0; j < pc->second.size(); ++j) v += fit.control_betas[a][j] * pc->second[j];
      }
      probs[a] += v;
    }
  }
  if (!uncovered.empty()) {
    std::string msg = "no fitted family effect for persons:";
    for (const auto& p : uncovered) msg += " " + p;
    throw EstimationError(msg);
  }
  for (auto& p : probs) p /= static_cast<double>(persons.size());
  return ResponseDistribution(scale, std::move(probs));
}

ResponseDistribution perturbed_distribution(const ResponseDistribution& base,
                                            std::span<const double> betas, double epsilon) {
  if (betas.size() != base.size()) throw ValidationError("beta vector length differs from scale");
  std::vector<double> probs(base.size());
  for (std::size_t a = 0; a < base.size(); ++a) probs[a] = base[a] + epsilon * betas[a];
  return ResponseDistribution(base.scale(), std::move(probs));
}

namespace {

void require_proper_pair(const ResponseDistribution& t, const ResponseDistribution& r,
                         std::span<const double> betas) {
  if (!(t.scale() == r.scale())) throw ValidationError("distributions are on different scales");
  if (!t.proper() || !r.proper()) throw ValidationError("marginal estimands need proper base distributions");
  if (betas.size() != t.size()) throw ValidationError("beta vector length differs from scale");
}

}  // namespace

MtvdResult mtvd_detail(const ResponseDistribution& p_treated,
                       const ResponseDistribution& p_reference, std::span<const double> betas) {
  require_proper_pair(p_treated, p_reference, betas);
  MtvdResult out;
  out.signs.resize(betas.size());
  double s = 0.0;
  for (std::size_t a = 0; a < betas.size(); ++a) {
    const double gap = p_treated[a] - p_reference[a];
    out.signs[a] = gap >= 0.0 ? 1 : -1;
    if (std::abs(gap) <= 1e-12) out.kink = true;
    s += out.signs[a] * betas[a];
  }
  out.value = 0.5 * s;
  return out;
}

double mtvd(const ResponseDistribution& p_treated, const ResponseDistribution& p_reference,
            std::span<const double> betas) {
  return mtvd_detail(p_treated, p_reference, betas).value;
}

double delta_tv0(const ResponseDistribution& p_reference, const ResponseDistribution& p_treated,
                 const ResponseDistribution& p_counterfactual) {
  return tv_distance(p_reference, p_treated) - tv_distance(p_reference, p_counterfactual);
}

double delta_kd0(const ResponseDistribution& p_reference, const ResponseDistribution& p_treated,
                 const ResponseDistribution& p_counterfactual) {
  return kolmogorov_distance(p_reference, p_treated).value -
         kolmogorov_distance(p_reference, p_counterfactual).value;
}

MkdResult mkd(const ResponseDistribution& p_treated, const ResponseDistribution& p_reference,
              std::span<const double> betas) {
  require_proper_pair(p_treated, p_reference, betas);
  const std::size_t k = betas.size();
  std::vector<double> g(k - 1);
  std::vector<double> b(k - 1);
  double cg = 0.0;
  double cb = 0.0;
  for (std::size_t c = 0; c + 1 < k; ++c) {
    cg += p_treated[c] - p_reference[c];  // same accumulation as kolmogorov_distance
    cb += betas[c];
    g[c] = cg;
    b[c] = cb;
  }
  double max_gap = 0.0;
  for (double v : g) max_gap = std::max(max_gap, std::abs(v));

  MkdResult out;
  if (max_gap <= kTieTolerance) {
    double max_b = 0.0;
    for (double v : b) max_b = std::max(max_b, std::abs(v));
    out.lo = -max_b;
    out.hi = max_b;
    out.undefined = true;
    for (std::size_t c = 0; c < g.size(); ++c) out.cutoffs.push_back(static_cast<int>(c + 1));
    return out;
  }
  bool first = true;
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (max_gap - std::abs(g[c]) > kTieTolerance) continue;
    out.cutoffs.push_back(static_cast<int>(c + 1));
    const double v = (g[c] > 0.0 ? 1.0 : -1.0) * b[c];
    out.lo = first ? v : std::min(out.lo, v);
    out.hi = first ? v : std::max(out.hi, v);
    first = false;
  }
  return out;
}

EstimandSet compute_estimands(const ResponseDistribution& p_reference,
                              const ResponseDistribution& p_treated,
                              const ResponseDistribution& p_counterfactual,
                              std::span<const double> betas) {
  EstimandSet e;
  e.tv_observed = tv_distance(p_reference, p_treated);
  e.tv_counterfactual = tv_distance(p_reference, p_counterfactual);
  e.delta_tv0 = e.tv_observed - e.tv_counterfactual;
  e.kd_observed = kolmogorov_distance(p_reference, p_treated).value;
  e.kd_counterfactual = kolmogorov_distance(p_reference, p_counterfactual).value;
  e.delta_kd0 = e.kd_observed - e.kd_counterfactual;
  const MtvdResult m = mtvd_detail(p_treated, p_reference, betas);
  e.mtvd = m.value;
  e.mtvd_signs = m.signs;
  e.mtvd_kink = m.kink;
  e.mkd = mkd(p_treated, p_reference, betas);
  e.counterfactual_proper = p_counterfactual.proper();
  return e;
}

double CountryTable::distance_to_reference(const std::string& country) const {
  auto ref = means.find(reference);
  if (ref == means.end()) throw ValidationError("reference country '" + reference + "' missing");
  auto it = means.find(country);
  if (it == means.end()) throw ValidationError("country '" + country + "' not in country table");
  return country_distance(it->second, ref->second);
}

SplitResult heterogeneity_split(const Panel& panel, const SplitContext& ctx) {
  const auto& recs = panel.records();

  // country per treated person; every treated record must carry one
  std::map<std::string, std::string> person_country;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    if (r.group != Group::treated) continue;
    if (!r.country_code || r.country_code->empty()) {
      throw ValidationError("treated record " + std::to_string(i) + " (person '" + r.person_id +
                            "') has no country_code");
    }
    person_country.emplace(r.person_id, *r.country_code);
  }

  std::set<std::string> first_countries;
  double median = 0.0;
  std::string first_label;
  std::string second_label;
  if (ctx.rule == SplitRule::regions) {
    const std::set<std::string> selected(ctx.selected_regions.begin(), ctx.selected_regions.end());
    for (const auto& [person, country] : person_country) {
      auto it = ctx.country_region.find(country);
      if (it == ctx.country_region.end()) {
        throw ValidationError("country '" + country + "' not covered by the region map");
      }
      if (selected.count(it->second)) first_countries.insert(country);
    }
    for (const auto& r : ctx.selected_regions) first_label += (first_label.empty() ? "" : "+") + r;
    first_label = "regions:" + first_label;
    second_label = "other_regions";
  } else {
    std::vector<double> d;
    d.reserve(person_country.size());
    std::map<std::string, double> dist;
    for (const auto& [person, country] : person_country) {
      auto [it, inserted] = dist.emplace(country, 0.0);
      if (inserted) it->second = ctx.countries.distance_to_reference(country);
      d.push_back(it->second);
    }
    if (!d.empty()) {
      std::sort(d.begin(), d.end());
      const std::size_t n = d.size();
      median = n % 2 == 1 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
    }
    for (const auto& [country, v] : dist) {
      if (v < median) first_countries.insert(country);
    }
    first_label = "similar";
    second_label = "different";
  }

  std::vector<RespondentRecord> first;
  std::vector<RespondentRecord> second;
  for (const auto& r : recs) {
    if (r.group == Group::reference) {
      first.push_back(r);
      second.push_back(r);
    } else if (first_countries.count(*r.country_code)) {
      first.push_back(r);
    } else {
      second.push_back(r);
    }
  }

  auto treated_count = [](const std::vector<RespondentRecord>& v) {
    return std::count_if(v.begin(), v.end(), [](const auto& r) { return r.group == Group::treated; });
  };
  SplitResult out{Panel(panel.scale(), std::move(first)), Panel(panel.scale(), std::move(second)),
                  first_label, second_label, median, {}};
  if (treated_count(out.first.records()) == 0) out.warnings.push_back("partition '" + first_label + "' has no treated records");
  if (treated_count(out.second.records()) == 0) out.warnings.push_back("partition '" + second_label + "' has no treated records");
  return out;
}

}  // namespace distconv
