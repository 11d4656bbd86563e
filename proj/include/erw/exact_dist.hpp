#pragma once

// Exact law of the black count at a finite horizon, by forward dynamic
// programming over (t, c) in log space. This is the oracle that the entropy,
// CGF and scaling routines are checked against.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "erw/process_sim.hpp"
#include "erw/urn_function.hpp"

namespace erw {

struct DistributionTable {
  std::int64_t horizon = 0;
  ProcessState initial{};
  /// log P(c at horizon) for c = 0..horizon; -inf where unreachable.
  std::vector<double> log_prob;

  double log_total() const;
  /// Smallest and largest reachable counts.
  std::int64_t c_min() const noexcept { return initial.c; }
  std::int64_t c_max() const noexcept { return initial.c + (horizon - initial.t); }
};

/// Two-slice workspace limit: horizons needing more than this many bytes
/// raise ErrorKind::Resource.
inline constexpr std::size_t kDistributionMemoryBudget = std::size_t{1} << 30;

/// P(c, t+1) = P(c, t) (1 - pi(c/t)) + P(c-1, t) pi((c-1)/t), from mass 1 at
/// `initial`. The inner count loop runs in parallel for wide slices; every
/// cell is computed independently, so results match the serial kernel bit for bit.
DistributionTable forward_distribution(const UrnFunction& f, ProcessState initial,
                                       std::int64_t horizon);

/// Single-threaded reference kernel.
DistributionTable forward_distribution_serial(const UrnFunction& f, ProcessState initial,
                                              std::int64_t horizon);

/// One forward pass, returning the table at each of the (ascending) horizons.
std::vector<DistributionTable> forward_distribution_snapshots(const UrnFunction& f,
                                                              ProcessState initial,
                                                              std::span<const std::int64_t> horizons);

struct EntropyCurve {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  std::vector<double> y;
  std::vector<double> phi_n1;
  std::vector<double> phi_n2;
  /// 2 phi_n2 - phi_n1; cancels the 1/N finite-size term when n2 = 2 n1.
  std::vector<double> phi_extrap;
  std::vector<bool> reachable;
};

/// Lattice count for density y at horizon n: round(y n), ties to even.
std::int64_t lattice_count(double y, std::int64_t n);

/// phi_N(y) = (1/N) log P(c = round(y N)) at both horizons plus the
/// extrapolation. Points with -inf mass at both horizons are marked unreachable.
EntropyCurve entropy_estimate(const UrnFunction& f, ProcessState initial, std::int64_t n1,
                              std::int64_t n2, std::span<const double> y_grid);

struct WindowScaling {
  std::vector<std::int64_t> horizons;
  /// log P(y1 < y_N < y2) at each horizon.
  std::vector<double> log_mass;
  /// Least-squares slope of log_mass against log N.
  double slope = 0.0;
  double intercept = 0.0;
  /// Set when the window holds a stable crossing, where no power law applies.
  bool contains_attractor = false;
  std::string warning;
};

WindowScaling window_mass_scaling(const UrnFunction& f, ProcessState initial, double y1,
                                  double y2, std::span<const std::int64_t> horizons);

}  // namespace erw
