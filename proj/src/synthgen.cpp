#include "distconv/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "distconv/distance.hpp"
#include "distconv/errors.hpp"
#include "distconv/resampling.hpp"

namespace distconv {
namespace {

constexpr double kSynthTolerance = 1e-12;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError("synthetic config: " + msg);
}

void require_range(const IntRange& r, const std::string& name, int min_lo) {
  require(r.lo >= min_lo && r.hi >= r.lo, name + " range is invalid");
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> uniform_simplex(Rng& rng, std::size_t k) {
  std::vector<double> cuts(k - 1);
  for (auto& c : cuts) c = rng.uniform();
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out(k);
  double prev = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    out[i] = cuts[i] - prev;
    prev = cuts[i];
  }
  out[k - 1] = 1.0 - prev;
  return out;
}

int draw_category(Rng& rng, const std::vector<double>& probs) {
  const double u = rng.uniform();
  double c = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    c += probs[a];
    if (u < c) return static_cast<int>(a + 1);
  }
  return static_cast<int>(probs.size());
}

double standardized_arrival(const SyntheticConfig& cfg, int eldest_age) {
  const double half = 0.5 * (cfg.first_arrival_age.hi - cfg.first_arrival_age.lo);
  if (half == 0.0) return 0.0;
  const double mid = 0.5 * (cfg.first_arrival_age.hi + cfg.first_arrival_age.lo);
  return (eldest_age - mid) / half;
}

}  // namespace

void SyntheticConfig::validate() const {
  const std::size_t k = true_betas.size();
  require(k >= 2, "need at least 2 categories");
  require(n_families >= 2, "need at least 2 treated families");
  require(effect_center.size() == k, "effect_center length differs from true_betas");
  require(reference_distribution.size() == k, "reference_distribution length differs from true_betas");
  require(std::abs(sum(true_betas)) <= 1e-12, "true_betas must sum to 0");
  require(std::abs(sum(effect_center) - 1.0) <= 1e-9, "effect_center must sum to 1");
  require(std::abs(sum(reference_distribution) - 1.0) <= 1e-9, "reference_distribution must sum to 1");
  for (double p : reference_distribution) require(p >= 0.0 && p <= 1.0, "reference_distribution outside [0,1]");
  for (double c : effect_center) require(c >= 0.0, "effect_center must be nonnegative");
  require(effect_spread >= 0.0 && effect_spread <= 1.0, "effect_spread must lie in [0,1]");
  require(confounding >= 0.0, "confounding must be >= 0");
  if (confounding > 0.0) {
    require(confounding_direction.size() == k, "confounding_direction length differs from true_betas");
    require(std::abs(sum(confounding_direction)) <= 1e-12, "confounding_direction must sum to 0");
  }
  require_range(siblings, "siblings", 2);
  require_range(reference_siblings, "reference_siblings", 1);
  require_range(first_arrival_age, "first_arrival_age", 0);
  require_range(birth_gap, "birth_gap", 0);
  require(!questions.empty(), "need at least one question");

  const double t_max = first_arrival_age.hi;
  for (std::size_t a = 0; a < k; ++a) {
    const double conf = confounding > 0.0 ? confounding * std::abs(confounding_direction[a]) : 0.0;
    const double base = (1.0 - effect_spread) * effect_center[a];
    const double lo = base - conf + std::min(0.0, true_betas[a] * t_max);
    const double hi = base + effect_spread + conf + std::max(0.0, true_betas[a] * t_max);
    require(lo >= 0.0 && hi <= 1.0,
            "category " + std::to_string(a + 1) + " probability can leave [0,1] (bounds " +
                std::to_string(lo) + ", " + std::to_string(hi) + ")");
  }
}

SyntheticPanel generate_panel(const SyntheticConfig& cfg) {
  cfg.validate();
  const std::size_t k = cfg.categories();
  SyntheticPanel out{Panel(OrdinalScale::with_size(k), {}), {}};
  out.truth.betas = cfg.true_betas;

  std::vector<RespondentRecord> records;
  for (std::size_t f = 0; f < cfg.n_families; ++f) {
    Rng rng(derive_seed(cfg.seed, f));
    const std::string fam = "T" + std::to_string(f);
    const int n_sibs = rng.between(cfg.siblings.lo, cfg.siblings.hi);
    const int eldest_arrival = rng.between(cfg.first_arrival_age.lo, cfg.first_arrival_age.hi);
    const int eldest_age = rng.between(25, 45);
    const double z = standardized_arrival(cfg, eldest_arrival);
    std::optional<std::string> country;
    if (!cfg.countries.empty()) country = cfg.countries[rng.index(cfg.countries.size())];

    std::vector<int> offset(static_cast<std::size_t>(n_sibs), 0);
    for (std::size_t j = 1; j < offset.size(); ++j) {
      offset[j] = offset[j - 1] + rng.between(cfg.birth_gap.lo, cfg.birth_gap.hi);
    }
    std::vector<int> sex(offset.size());
    for (auto& s : sex) s = static_cast<int>(rng.index(2));

    for (const auto& q : cfg.questions) {
      std::vector<double> gamma = uniform_simplex(rng, k);
      for (std::size_t a = 0; a < k; ++a) {
        gamma[a] = (1.0 - cfg.effect_spread) * cfg.effect_center[a] + cfg.effect_spread * gamma[a];
        if (cfg.confounding > 0.0) gamma[a] += cfg.confounding * z * cfg.confounding_direction[a];
      }
      for (std::size_t j = 0; j < offset.size(); ++j) {
        const double mig_age = std::max(0, eldest_arrival - offset[j]);
        std::vector<double> probs(k);
        for (std::size_t a = 0; a < k; ++a) {
          probs[a] = gamma[a] + mig_age * cfg.true_betas[a];
          if (probs[a] < -kSynthTolerance || probs[a] > 1.0 + kSynthTolerance) {
            throw ValidationError("synthetic probability outside [0,1] at draw time");
          }
        }
        RespondentRecord r;
        r.person_id = fam + "_" + std::to_string(j);
        r.family_id = fam;
        r.group = Group::treated;
        r.question_id = q;
        r.response = draw_category(rng, probs);
        r.treatment = mig_age;
        r.sex = sex[j];
        r.oldest = j == 0 ? 1 : 0;
        r.age_at_interview = eldest_age - offset[j];
        r.wave = cfg.wave;
        r.country_code = country;
        records.push_back(std::move(r));
      }
      out.truth.family_effects[q][fam] = std::move(gamma);
    }
  }

  const std::uint64_t ref_seed = splitmix64(cfg.seed + 1);
  for (std::size_t f = 0; f < cfg.n_reference_families; ++f) {
    Rng rng(derive_seed(ref_seed, f));
    const std::string fam = "R" + std::to_string(f);
    const int n_sibs = rng.between(cfg.reference_siblings.lo, cfg.reference_siblings.hi);
    const int eldest_age = rng.between(25, 45);
    std::vector<int> offset(static_cast<std::size_t>(n_sibs), 0);
    for (std::size_t j = 1; j < offset.size(); ++j) {
      offset[j] = offset[j - 1] + rng.between(cfg.birth_gap.lo, cfg.birth_gap.hi);
    }
    for (const auto& q : cfg.questions) {
      for (std::size_t j = 0; j < offset.size(); ++j) {
        RespondentRecord r;
        r.person_id = fam + "_" + std::to_string(j);
        r.family_id = fam;
        r.group = Group::reference;
        r.question_id = q;
        r.response = draw_category(rng, cfg.reference_distribution);
        r.sex = static_cast<int>(rng.index(2));
        r.oldest = j == 0 ? 1 : 0;
        r.age_at_interview = eldest_age - offset[j];
        r.wave = cfg.wave;
        records.push_back(std::move(r));
      }
    }
  }
  out.panel = Panel(OrdinalScale::with_size(k), std::move(records));
  return out;
}

TrueEstimands true_estimands(const SyntheticConfig& cfg) {
  cfg.validate();
  const std::size_t k = cfg.categories();

  // distribution of the cumulative gap after j births: j-fold convolution
  const int gap_lo = cfg.birth_gap.lo;
  const int gap_hi = cfg.birth_gap.hi;
  const double p_gap = 1.0 / (gap_hi - gap_lo + 1);
  const double p_sibs = 1.0 / (cfg.siblings.hi - cfg.siblings.lo + 1);
  const double p_arrival = 1.0 / (cfg.first_arrival_age.hi - cfg.first_arrival_age.lo + 1);

  std::vector<double> cum{1.0};  // P(G_j = g), g = 0..
  double person_mass = 0.0;
  double mig_mass = 0.0;
  double z_mass = 0.0;
  double mean_z = 0.0;
  for (int a = cfg.first_arrival_age.lo; a <= cfg.first_arrival_age.hi; ++a) {
    mean_z += p_arrival * standardized_arrival(cfg, a);
  }
  for (int j = 0; j < cfg.siblings.hi; ++j) {
    // sibling j exists in families with more than j children
    double p_exists = 0.0;
    for (int s = cfg.siblings.lo; s <= cfg.siblings.hi; ++s) {
      if (s > j) p_exists += p_sibs;
    }
    double e_mig = 0.0;
    for (int a = cfg.first_arrival_age.lo; a <= cfg.first_arrival_age.hi; ++a) {
      for (std::size_t g = 0; g < cum.size(); ++g) {
        e_mig += p_arrival * cum[g] * std::max(0, a - static_cast<int>(g));
      }
    }
    person_mass += p_exists;
    mig_mass += p_exists * e_mig;
    z_mass += p_exists * mean_z;

    std::vector<double> next(cum.size() + static_cast<std::size_t>(gap_hi), 0.0);
    for (std::size_t g = 0; g < cum.size(); ++g) {
      for (int d = gap_lo; d <= gap_hi; ++d) next[g + static_cast<std::size_t>(d)] += cum[g] * p_gap;
    }
    cum = std::move(next);
  }
  const double mean_treatment = mig_mass / person_mass;
  const double mean_zp = z_mass / person_mass;

  std::vector<double> cf(k);
  std::vector<double> treated(k);
  for (std::size_t a = 0; a < k; ++a) {
    cf[a] = (1.0 - cfg.effect_spread) * cfg.effect_center[a] +
            cfg.effect_spread / static_cast<double>(k);
    if (cfg.confounding > 0.0) cf[a] += cfg.confounding * mean_zp * cfg.confounding_direction[a];
    treated[a] = cf[a] + mean_treatment * cfg.true_betas[a];
  }
  const OrdinalScale scale = OrdinalScale::with_size(k);
  TrueEstimands out{ResponseDistribution(scale, treated), ResponseDistribution(scale, cf),
                    ResponseDistribution(scale, cfg.reference_distribution), mean_treatment, {}, 0.0};
  out.estimands =
      compute_estimands(out.p_reference, out.p_treated, out.p_counterfactual, cfg.true_betas);

  // TV is piecewise linear in epsilon; stay inside the linear piece
  double min_gap = 1.0;
  double max_beta = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    const double gap = std::abs(treated[a] - cfg.reference_distribution[a]);
    if (gap > 0.0) min_gap = std::min(min_gap, gap);
    max_beta = std::max(max_beta, std::abs(cfg.true_betas[a]));
  }
  const double eps = max_beta > 0.0 ? std::min(1e-3, 0.25 * min_gap / max_beta) : 1e-3;
  std::vector<double> up(k);
  std::vector<double> down(k);
  for (std::size_t a = 0; a < k; ++a) {
    up[a] = treated[a] + eps * cfg.true_betas[a];
    down[a] = treated[a] - eps * cfg.true_betas[a];
  }
  out.mtvd_finite_difference =
      (tv_distance(up, cfg.reference_distribution) - tv_distance(down, cfg.reference_distribution)) /
      (2.0 * eps);
  return out;
}

}  // namespace distconv
