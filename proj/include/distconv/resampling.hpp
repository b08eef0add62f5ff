#pragma once

// Family-block bootstrap. Whole families are drawn with replacement and
// relabelled per draw copy, the statistic is recomputed on every replicate,
// and percentile intervals are read off the replicate distribution.
//
// Replicate r draws from its own generator seeded with
// replicate_seed(seed, r), so results do not depend on thread count or
// scheduling. family_bootstrap runs replicates with OpenMP;
// family_bootstrap_serial is the single-threaded reference it must match
// bit for bit.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "distconv/fe_lpm.hpp"
#include "distconv/ordinal.hpp"

namespace distconv {

std::uint64_t splitmix64(std::uint64_t x);

/// splitmix64(splitmix64(seed) ^ index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// mt19937_64 with portable bounded-integer and unit-interval draws (the
/// std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on {0, .., n-1}, by rejection.
  std::uint64_t index(std::uint64_t n);
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [lo, hi].
  int between(int lo, int hi);

 private:
  std::mt19937_64 engine_;
};

struct BootstrapOptions {
  std::size_t reps = 1000;
  std::uint64_t seed = 20240101;
  double ci_level = 0.95;
  bool hold_reference = false;  // resample treated families only
  int threads = 0;              // 0: OpenMP default
};

struct ReplicateFailure {
  std::size_t index = 0;
  std::string reason;
};

struct BootstrapRun {
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  double ci_level = 0.95;
  bool hold_reference = false;
  std::vector<std::vector<double>> replicates;  // successful replicates, index order
  std::vector<std::size_t> replicate_index;     // original index of each
  std::vector<ReplicateFailure> failures;
  std::vector<std::vector<std::uint32_t>> draws;  // drawn family positions per replicate

  std::size_t n_stats() const { return replicates.empty() ? 0 : replicates.front().size(); }
  std::vector<double> column(std::size_t stat) const;
  /// Nearest-rank percentile interval for one statistic.
  std::pair<double, double> ci(std::size_t stat) const;
};

using Statistic = std::function<std::vector<double>(const Panel&)>;

/// Nearest-rank quantiles at (1 -+ level) / 2.
std::pair<double, double> percentile_interval(std::vector<double> values, double level);

/// Families eligible for resampling, in first-appearance order.
std::vector<std::string> resampling_families(const Panel& panel, bool hold_reference);

/// Family positions drawn for replicate r.
std::vector<std::uint32_t> draw_families(std::uint64_t seed, std::size_t r, std::size_t n_families);

/// Panel made of the drawn families. Copy j of a family gets ids
/// "<family>#<j>" and "<person>#<j>". Held reference records are kept as is.
Panel assemble_replicate(const Panel& panel, const std::vector<std::string>& families,
                         const std::vector<std::uint32_t>& draw, bool hold_reference);

BootstrapRun family_bootstrap(const Panel& panel, const Statistic& statistic,
                              const BootstrapOptions& options);
BootstrapRun family_bootstrap_serial(const Panel& panel, const Statistic& statistic,
                                     const BootstrapOptions& options);

struct ConsistencyDraws {
  std::vector<double> sum_betas;  // sum_a beta_a per replicate
  std::vector<double> sum_fe;     // person mean of sum_a gamma_f(i) per replicate
  BootstrapRun run;
};

/// Bootstrap distribution of the adding-up sums of the category system.
ConsistencyDraws consistency_distributions(const Panel& panel, const std::string& question,
                                           const BootstrapOptions& options, Controls controls = {});

}  // namespace distconv
