#include "distconv/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "distconv/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace distconv {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ index);
}

std::uint64_t Rng::index(std::uint64_t n) {
  if (n == 0) throw ValidationError("cannot draw from an empty range");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % n + 1) % n;
  std::uint64_t v = engine_();
  while (v > limit) v = engine_();
  return v % n;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

int Rng::between(int lo, int hi) {
  if (hi < lo) throw ValidationError("empty integer range");
  return lo + static_cast<int>(index(static_cast<std::uint64_t>(hi - lo) + 1));
}

std::vector<double> BootstrapRun::column(std::size_t stat) const {
  std::vector<double> v;
  v.reserve(replicates.size());
  for (const auto& r : replicates) v.push_back(r.at(stat));
  return v;
}

std::pair<double, double> BootstrapRun::ci(std::size_t stat) const {
  return percentile_interval(column(stat), ci_level);
}

std::pair<double, double> percentile_interval(std::vector<double> values, double level) {
  if (values.empty()) throw EstimationError("no successful replicates for a percentile interval");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("ci level must lie in (0, 1)");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = [&](double prob) {
    // 1e-9 absorbs representation error, e.g. 1000 * 0.025 = 25.000000000000004
    const double r = std::ceil(prob * n - 1e-9);
    return static_cast<std::size_t>(std::clamp(r, 1.0, n)) - 1;
  };
  return {values[rank((1.0 - level) / 2.0)], values[rank((1.0 + level) / 2.0)]};
}

std::vector<std::string> resampling_families(const Panel& panel, bool hold_reference) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : panel.records()) {
    if (hold_reference && r.group != Group::treated) continue;
    if (seen.insert(r.family_id).second) out.push_back(r.family_id);
  }
  return out;
}

std::vector<std::uint32_t> draw_families(std::uint64_t seed, std::size_t r, std::size_t n_families) {
  Rng rng(derive_seed(seed, r));
  std::vector<std::uint32_t> draw(n_families);
  for (auto& d : draw) d = static_cast<std::uint32_t>(rng.index(n_families));
  return draw;
}

Panel assemble_replicate(const Panel& panel, const std::vector<std::string>& families,
                         const std::vector<std::uint32_t>& draw, bool hold_reference) {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < families.size(); ++i) position.emplace(families[i], i);
  std::vector<std::vector<const RespondentRecord*>> members(families.size());
  std::vector<RespondentRecord> out;
  for (const auto& r : panel.records()) {
    if (hold_reference && r.group != Group::treated) {
      out.push_back(r);
      continue;
    }
    auto it = position.find(r.family_id);
    if (it != position.end()) members[it->second].push_back(&r);
  }
  for (std::size_t j = 0; j < draw.size(); ++j) {
    const std::string suffix = "#" + std::to_string(j);
    for (const auto* r : members[draw[j]]) {
      RespondentRecord copy = *r;
      copy.family_id += suffix;
      copy.person_id += suffix;
      out.push_back(std::move(copy));
    }
  }
  return Panel(panel.scale(), std::move(out));
}

namespace {

struct Slot {
  bool ok = false;
  std::vector<double> values;
  std::string reason;
  std::vector<std::uint32_t> draw;
};

Slot run_replicate(const Panel& panel, const std::vector<std::string>& families,
                   const Statistic& statistic, const BootstrapOptions& options, std::size_t r) {
  Slot slot;
  slot.draw = draw_families(options.seed, r, families.size());
  try {
    const Panel rep = assemble_replicate(panel, families, slot.draw, options.hold_reference);
    slot.values = statistic(rep);
    slot.ok = true;
  } catch (const std::exception& e) {
    slot.reason = e.what();
  }
  return slot;
}

void check_options(const std::vector<std::string>& families, const BootstrapOptions& options) {
  if (options.reps == 0) throw ValidationError("bootstrap needs at least one replicate (B = 0)");
  if (!(options.ci_level > 0.0 && options.ci_level < 1.0)) throw ValidationError("ci level must lie in (0, 1)");
  if (families.size() < 2) throw ValidationError("bootstrap needs at least two families");
}

BootstrapRun collect(std::vector<Slot>& slots, const BootstrapOptions& options) {
  BootstrapRun run;
  run.seed = options.seed;
  run.reps = options.reps;
  run.ci_level = options.ci_level;
  run.hold_reference = options.hold_reference;
  run.draws.reserve(slots.size());
  for (std::size_t r = 0; r < slots.size(); ++r) {
    Slot& s = slots[r];
    run.draws.push_back(std::move(s.draw));
    if (s.ok && !run.replicates.empty() && s.values.size() != run.replicates.front().size()) {
      s.ok = false;
      s.reason = "statistic length changed between replicates";
    }
    if (s.ok) {
      run.replicates.push_back(std::move(s.values));
      run.replicate_index.push_back(r);
    } else {
      run.failures.push_back({r, std::move(s.reason)});
    }
  }
  return run;
}

}  // namespace

BootstrapRun family_bootstrap(const Panel& panel, const Statistic& statistic,
                              const BootstrapOptions& options) {
  const auto families = resampling_families(panel, options.hold_reference);
  check_options(families, options);
  std::vector<Slot> slots(options.reps);
  const auto n = static_cast<long long>(options.reps);
#ifdef _OPENMP
  const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (long long r = 0; r < n; ++r) {
    slots[static_cast<std::size_t>(r)] =
        run_replicate(panel, families, statistic, options, static_cast<std::size_t>(r));
  }
  return collect(slots, options);
}

BootstrapRun family_bootstrap_serial(const Panel& panel, const Statistic& statistic,
                                     const BootstrapOptions& options) {
  const auto families = resampling_families(panel, options.hold_reference);
  check_options(families, options);
  std::vector<Slot> slots(options.reps);
  for (std::size_t r = 0; r < options.reps; ++r) {
    slots[r] = run_replicate(panel, families, statistic, options, r);
  }
  return collect(slots, options);
}

ConsistencyDraws consistency_distributions(const Panel& panel, const std::string& question,
                                           const BootstrapOptions& options, Controls controls) {
  if (!panel.has_question(question)) throw ValidationError("unknown question id '" + question + "'");
  const Statistic stat = [&question, controls](const Panel& p) {
    const CategorySystemFit fit = fit_category_system(p, question, controls);
    double sum_beta = 0.0;
    for (double b : fit.betas) sum_beta += b;
    double sum_fe = 0.0;
    for (const auto& [person, fam] : fit.person_family) {
      for (double g : fit.family_effects.at(fam)) sum_fe += g;
    }
    sum_fe /= static_cast<double>(fit.person_family.size());
    return std::vector<double>{sum_beta, sum_fe};
  };
  ConsistencyDraws out;
  out.run = family_bootstrap(panel, stat, options);
  out.sum_betas = out.run.column(0);
  out.sum_fe = out.run.column(1);
  return out;
}

}  // namespace distconv
