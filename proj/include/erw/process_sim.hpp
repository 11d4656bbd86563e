#pragma once

// Monte Carlo simulation of the urn process and of the walk it encodes.

#include <cstdint>
#include <span>
#include <vector>

#include "erw/rng.hpp"
#include "erw/urn_function.hpp"

namespace erw {

/// Elapsed steps t and black-ball (positive-step) count c.
struct ProcessState {
  std::int64_t t = 2;
  std::int64_t c = 1;

  double density() const noexcept { return static_cast<double>(c) / static_cast<double>(t); }
  /// Average step x = 2y - 1.
  double mean_step() const noexcept { return 2.0 * density() - 1.0; }
  /// Throws ErrorKind::InvalidState unless t >= 1 and 0 <= c <= t.
  void validate() const;

  friend bool operator==(const ProcessState&, const ProcessState&) = default;
};

struct SimConfig {
  std::int64_t horizon = 1000;
  ProcessState initial{};
  std::uint64_t seed = 0;
  bool record_path = false;
  bool record_crossings = false;

  void validate() const;
};

enum class Extraction { WithReplacement, WithoutReplacement };

struct WalkResult {
  ProcessState final_state;
  /// States after each step; horizon - t0 entries when recorded.
  std::vector<ProcessState> path;
  /// Strict sign changes of 2c - t; zero when not recorded.
  std::int64_t crossings = 0;
};

/// One urn draw: c grows by one with probability pi(c / t).
ProcessState step_urn(ProcessState state, const UrnFunction& f, Rng& rng);

/// One walk step from an explicit history of +1/-1 steps: draw k past steps,
/// take their majority sign, follow it with probability p. Returns +1 or -1.
int step_erw_direct(std::span<const std::int8_t> history, int k, double p, Rng& rng,
                    Extraction mode = Extraction::WithReplacement);

/// Runs the urn from cfg.initial up to cfg.horizon. Deterministic in cfg.seed.
WalkResult run_walk(const UrnFunction& f, const SimConfig& cfg);

/// Same walk, but each step is drawn from the full step history.
WalkResult run_walk_direct(int k, double p, const SimConfig& cfg,
                           Extraction mode = Extraction::WithReplacement);

struct EnsembleOptions {
  /// Densities whose delta-neighbourhoods are counted in attractor_fractions.
  std::vector<double> attractors;
  double delta = 0.05;
  int bins = 100;
};

struct EnsembleSummary {
  std::int64_t n_runs = 0;
  double mean = 0.0;
  double variance = 0.0;
  double bin_width = 0.0;
  /// Mass of final densities per bin [i w, (i+1) w); the last bin includes 1.
  std::vector<double> histogram;
  std::vector<double> attractors;
  std::vector<double> attractor_fractions;
  double mean_crossings = 0.0;
};

/// Runs n_runs walks; run i is seeded with stream_seed(cfg.seed, i). Parallel over runs,
/// with the per-run outcomes reduced in index order.
EnsembleSummary run_ensemble(const UrnFunction& f, const SimConfig& cfg, std::int64_t n_runs,
                             const EnsembleOptions& opts = {});

/// Single-threaded reference for run_ensemble; results are bit-identical.
EnsembleSummary run_ensemble_serial(const UrnFunction& f, const SimConfig& cfg,
                                    std::int64_t n_runs, const EnsembleOptions& opts = {});

}  // namespace erw
