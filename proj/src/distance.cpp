#include "distconv/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "distconv/errors.hpp"

namespace distconv {
namespace {

void require_same_length(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ValidationError("distributions have different lengths");
  if (p.size() < 2) throw ValidationError("distributions need at least 2 categories");
}

void require_same_scale(const ResponseDistribution& p, const ResponseDistribution& q) {
  if (!(p.scale() == q.scale())) throw ValidationError("distributions are on different scales");
}

void require_proper(const ResponseDistribution& p, const ResponseDistribution& q) {
  if (!p.proper() || !q.proper()) throw ValidationError("operation requires proper distributions");
}

}  // namespace

ScoringRule::ScoringRule(std::vector<double> values, bool monotone)
    : values_(std::move(values)), monotone_(monotone) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0 && values_[i] <= 1.0)) {
      throw ValidationError("scoring rule values must lie in [0, 1]");
    }
    if (monotone_ && i > 0 && values_[i] < values_[i - 1]) {
      throw ValidationError("monotone scoring rule must be nondecreasing");
    }
  }
}

ScoringRule ScoringRule::indicator(std::size_t k, std::span<const int> codes) {
  std::vector<double> v(k, 0.0);
  for (int c : codes) {
    if (c < 1 || static_cast<std::size_t>(c) > k) throw ValidationError("indicator code out of range");
    v[static_cast<std::size_t>(c - 1)] = 1.0;
  }
  return ScoringRule(std::move(v));
}

ScoringRule ScoringRule::threshold(std::size_t k, int cutoff) {
  std::vector<double> v(k, 0.0);
  for (std::size_t a = 1; a <= k; ++a) v[a - 1] = static_cast<int>(a) > cutoff ? 1.0 : 0.0;
  return ScoringRule(std::move(v), true);
}

double ScoringRule::expectation(std::span<const double> probs) const {
  if (probs.size() != values_.size()) throw ValidationError("scoring rule length mismatch");
  double e = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) e += values_[a] * probs[a];
  return e;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  require_same_length(p, q);
  double pos = 0.0;
  double neg = 0.0;
  double mass = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double d = p[a] - q[a];
    if (d > 0.0) {
      pos += d;
    } else {
      neg -= d;
    }
    mass += d;
  }
  // equal masses: both parts equal half the L1 norm; the larger one bounds
  // every partial sum taken by kolmogorov_distance in the same order
  if (std::abs(mass) <= 1e-9) return std::max(pos, neg);
  return 0.5 * (pos + neg);
}

double tv_distance(const ResponseDistribution& p, const ResponseDistribution& q) {
  require_same_scale(p, q);
  return tv_distance(p.probs(), q.probs());
}

double min_coupling_mismatch(std::span<const double> p, std::span<const double> q) {
  require_same_length(p, q);
  double overlap = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) overlap += std::min(p[a], q[a]);
  return 1.0 - overlap;
}

double min_coupling_mismatch(const ResponseDistribution& p, const ResponseDistribution& q) {
  require_same_scale(p, q);
  require_proper(p, q);
  return min_coupling_mismatch(p.probs(), q.probs());
}

DistanceResult kolmogorov_distance(std::span<const double> p, std::span<const double> q) {
  require_same_length(p, q);
  const std::size_t k = p.size();
  std::vector<double> gap(k - 1);
  double g = 0.0;  // F_p(c) - F_q(c), accumulated from p - q
  for (std::size_t c = 0; c + 1 < k; ++c) {
    g += p[c] - q[c];
    gap[c] = std::abs(g);
  }
  DistanceResult out;
  out.value = *std::max_element(gap.begin(), gap.end());
  for (std::size_t c = 0; c < gap.size(); ++c) {
    if (out.value - gap[c] <= kTieTolerance) out.argmax_cutoffs.push_back(static_cast<int>(c + 1));
  }
  return out;
}

DistanceResult kolmogorov_distance(const ResponseDistribution& p, const ResponseDistribution& q) {
  require_same_scale(p, q);
  return kolmogorov_distance(p.probs(), q.probs());
}

DistanceResult wcad_bruteforce(std::span<const double> p, std::span<const double> q) {
  require_same_length(p, q);
  const std::size_t k = p.size();
  if (k > kMaxEnumerationCategories) {
    throw ValidationError("wcad enumeration limited to " +
                          std::to_string(kMaxEnumerationCategories) + " categories");
  }
  const std::uint32_t n_masks = std::uint32_t{1} << k;
  double best = 0.0;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 1; mask < n_masks; ++mask) {
    double ep = 0.0;
    double eq = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      if (mask & (std::uint32_t{1} << a)) {
        ep += p[a];
        eq += q[a];
      }
    }
    const double diff = ep - eq;
    if (diff > best) {
      best = diff;
      best_mask = mask;
    }
  }
  DistanceResult out;
  out.value = best;
  for (std::size_t a = 0; a < k; ++a) {
    if (best_mask & (std::uint32_t{1} << a)) out.witness_codes.push_back(static_cast<int>(a + 1));
  }
  out.witness = ScoringRule::indicator(k, out.witness_codes);
  return out;
}

DistanceResult wcad_bruteforce(const ResponseDistribution& p, const ResponseDistribution& q) {
  require_same_scale(p, q);
  require_proper(p, q);
  return wcad_bruteforce(p.probs(), q.probs());
}

DistanceResult owcad_bruteforce(std::span<const double> p, std::span<const double> q) {
  require_same_length(p, q);
  const std::size_t k = p.size();
  if (k > kMaxEnumerationCategories) {
    throw ValidationError("owcad enumeration limited to " +
                          std::to_string(kMaxEnumerationCategories) + " categories");
  }
  std::vector<double> gap(k - 1);
  for (std::size_t cut = 1; cut < k; ++cut) {
    double ep = 0.0;
    double eq = 0.0;
    for (std::size_t a = cut; a < k; ++a) {
      ep += p[a];
      eq += q[a];
    }
    gap[cut - 1] = std::abs(ep - eq);
  }
  DistanceResult out;
  out.value = *std::max_element(gap.begin(), gap.end());
  for (std::size_t c = 0; c < gap.size(); ++c) {
    if (out.value - gap[c] <= kTieTolerance) out.argmax_cutoffs.push_back(static_cast<int>(c + 1));
  }
  const int cutoff = out.argmax_cutoffs.front();
  out.witness_codes = {cutoff};
  out.witness = ScoringRule::threshold(k, cutoff);
  return out;
}

DistanceResult owcad_bruteforce(const ResponseDistribution& p, const ResponseDistribution& q) {
  require_same_scale(p, q);
  require_proper(p, q);
  return owcad_bruteforce(p.probs(), q.probs());
}

double country_distance(std::span<const double> means_a, std::span<const double> means_b) {
  if (means_a.size() != means_b.size()) throw ValidationError("country mean vectors differ in length");
  if (means_a.empty()) throw ValidationError("country mean vectors are empty");
  double s = 0.0;
  for (std::size_t j = 0; j < means_a.size(); ++j) {
    const double d = means_a[j] - means_b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace distconv
