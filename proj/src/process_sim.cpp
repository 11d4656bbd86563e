#include "erw/process_sim.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "erw/error.hpp"
#include "erw/parallel.hpp"

namespace erw {

namespace {

int sign_of(std::int64_t v) noexcept { return (v > 0) - (v < 0); }

struct CrossingCounter {
  int last_sign = 0;
  std::int64_t count = 0;

  void observe(const ProcessState& s) noexcept {
    const int sign = sign_of(2 * s.c - s.t);
    if (sign == 0) return;
    if (last_sign != 0 && sign != last_sign) ++count;
    last_sign = sign;
  }
};

struct RunOutcome {
  double density;
  std::int64_t crossings;
};

EnsembleSummary summarize(const std::vector<RunOutcome>& runs, const EnsembleOptions& opts) {
  EnsembleSummary s;
  s.n_runs = static_cast<std::int64_t>(runs.size());
  const double n = static_cast<double>(runs.size());
  const int bins = std::max(1, opts.bins);
  s.bin_width = 1.0 / bins;
  s.histogram.assign(static_cast<std::size_t>(bins), 0.0);
  s.attractors = opts.attractors;
  s.attractor_fractions.assign(opts.attractors.size(), 0.0);

  double sum = 0.0;
  double crossings = 0.0;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
  std::vector<std::int64_t> near(opts.attractors.size(), 0);
  for (const auto& r : runs) {
    sum += r.density;
    crossings += static_cast<double>(r.crossings);
    const auto bin = std::min<std::int64_t>(bins - 1, static_cast<std::int64_t>(r.density * bins));
    ++counts[static_cast<std::size_t>(bin)];
    for (std::size_t a = 0; a < opts.attractors.size(); ++a) {
      if (std::fabs(r.density - opts.attractors[a]) <= opts.delta) ++near[a];
    }
  }
  s.mean = sum / n;
  double sq = 0.0;
  for (const auto& r : runs) sq += (r.density - s.mean) * (r.density - s.mean);
  s.variance = runs.size() > 1 ? sq / (n - 1.0) : 0.0;
  s.mean_crossings = crossings / n;
  for (std::size_t b = 0; b < counts.size(); ++b) s.histogram[b] = static_cast<double>(counts[b]) / n;
  for (std::size_t a = 0; a < near.size(); ++a) s.attractor_fractions[a] = static_cast<double>(near[a]) / n;
  return s;
}

RunOutcome run_one(const UrnFunction& f, const SimConfig& cfg, std::int64_t index) {
  SimConfig run = cfg;
  run.seed = stream_seed(cfg.seed, static_cast<std::uint64_t>(index));
  run.record_path = false;
  const WalkResult w = run_walk(f, run);
  return {w.final_state.density(), w.crossings};
}

void check_runs(std::int64_t n_runs) {
  if (n_runs < 1) {
    throw Error(ErrorKind::InvalidParameter, fmt::format("n_runs must be >= 1, got {}", n_runs));
  }
}

}  // namespace

void ProcessState::validate() const {
  if (t < 1 || c < 0 || c > t) {
    throw Error(ErrorKind::InvalidState,
                fmt::format("process state (t={}, c={}) needs t >= 1 and 0 <= c <= t", t, c));
  }
}

void SimConfig::validate() const {
  initial.validate();
  if (horizon < initial.t) {
    throw Error(ErrorKind::InvalidState,
                fmt::format("horizon {} is before the initial time {}", horizon, initial.t));
  }
}

ProcessState step_urn(ProcessState state, const UrnFunction& f, Rng& rng) {
  const bool black = rng.bernoulli(f(state.density()));
  ++state.t;
  if (black) ++state.c;
  return state;
}

int step_erw_direct(std::span<const std::int8_t> history, int k, double p, Rng& rng,
                    Extraction mode) {
  if (history.empty()) {
    throw Error(ErrorKind::InvalidState, "cannot extract from an empty step history");
  }
  if (k < 1 || k % 2 == 0) {
    throw Error(ErrorKind::InvalidParameter,
                fmt::format("k must be an odd positive integer, got {}", k));
  }
  const auto n = static_cast<std::uint64_t>(history.size());
  int sum = 0;
  if (mode == Extraction::WithReplacement) {
    for (int i = 0; i < k; ++i) sum += history[rng.below(n)];
  } else {
    if (static_cast<std::uint64_t>(k) > n) {
      throw Error(ErrorKind::InvalidState,
                  fmt::format("cannot draw {} distinct steps from a history of {}", k, n));
    }
    // Floyd's sampling of k distinct indices
    std::vector<std::uint64_t> chosen;
    chosen.reserve(static_cast<std::size_t>(k));
    for (std::uint64_t j = n - static_cast<std::uint64_t>(k); j < n; ++j) {
      const std::uint64_t r = rng.below(j + 1);
      const bool seen = std::find(chosen.begin(), chosen.end(), r) != chosen.end();
      chosen.push_back(seen ? j : r);
    }
    for (auto idx : chosen) sum += history[idx];
  }
  const int majority = sum > 0 ? 1 : -1;
  return rng.bernoulli(p) ? majority : -majority;
}

WalkResult run_walk(const UrnFunction& f, const SimConfig& cfg) {
  cfg.validate();
  WalkResult out;
  Rng rng(cfg.seed);
  ProcessState s = cfg.initial;
  CrossingCounter counter;
  counter.observe(s);
  if (cfg.record_path) out.path.reserve(static_cast<std::size_t>(cfg.horizon - s.t));
  while (s.t < cfg.horizon) {
    s = step_urn(s, f, rng);
    if (cfg.record_crossings) counter.observe(s);
    if (cfg.record_path) out.path.push_back(s);
  }
  out.final_state = s;
  out.crossings = cfg.record_crossings ? counter.count : 0;
  return out;
}

WalkResult run_walk_direct(int k, double p, const SimConfig& cfg, Extraction mode) {
  cfg.validate();
  WalkResult out;
  Rng rng(cfg.seed);
  ProcessState s = cfg.initial;
  std::vector<std::int8_t> history;
  history.reserve(static_cast<std::size_t>(cfg.horizon));
  history.insert(history.end(), static_cast<std::size_t>(s.c), std::int8_t{1});
  history.insert(history.end(), static_cast<std::size_t>(s.t - s.c), std::int8_t{-1});
  CrossingCounter counter;
  counter.observe(s);
  while (s.t < cfg.horizon) {
    const int step = step_erw_direct(history, k, p, rng, mode);
    history.push_back(static_cast<std::int8_t>(step));
    ++s.t;
    if (step > 0) ++s.c;
    if (cfg.record_crossings) counter.observe(s);
    if (cfg.record_path) out.path.push_back(s);
  }
  out.final_state = s;
  out.crossings = cfg.record_crossings ? counter.count : 0;
  return out;
}

EnsembleSummary run_ensemble_serial(const UrnFunction& f, const SimConfig& cfg,
                                    std::int64_t n_runs, const EnsembleOptions& opts) {
  check_runs(n_runs);
  cfg.validate();
  std::vector<RunOutcome> runs(static_cast<std::size_t>(n_runs));
  for (std::int64_t i = 0; i < n_runs; ++i) runs[static_cast<std::size_t>(i)] = run_one(f, cfg, i);
  return summarize(runs, opts);
}

EnsembleSummary run_ensemble(const UrnFunction& f, const SimConfig& cfg, std::int64_t n_runs,
                             const EnsembleOptions& opts) {
  check_runs(n_runs);
  cfg.validate();
  std::vector<RunOutcome> runs(static_cast<std::size_t>(n_runs));
#pragma omp parallel for schedule(dynamic, 4) num_threads(thread_count())
  for (std::int64_t i = 0; i < n_runs; ++i) runs[static_cast<std::size_t>(i)] = run_one(f, cfg, i);
  return summarize(runs, opts);
}

}  // namespace erw
