#pragma once

// Fixed points of pi(y) = y, their stability, and the critical memory
// parameters at which the phase structure of the walk changes.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "erw/urn_function.hpp"

namespace erw {

/// Down-crossings (slope < 1) attract; up-crossings (slope > 1) repel.
enum class Stability { Stable, Unstable, Tangent };

const char* to_string(Stability s) noexcept;

struct CrossingPoint {
  double y_star = 0.0;
  double slope = 0.0;
  Stability stability = Stability::Stable;
};

inline constexpr double kTangentWindow = 1e-8;

/// All roots of pi(y) - y on [0, 1], ascending. Sign scan on a 10^4 grid,
/// bisection refinement, a local-minimum pass for even-order (touching) roots,
/// and deduplication within 1e-9. StepLimit returns its known crossings.
std::vector<CrossingPoint> find_crossings(const UrnFunction& f);

struct AttractorPair {
  double y_minus = 0.0;
  double y_plus = 0.0;
  double x_minus = 0.0;
  double x_plus = 0.0;
};

/// Closed-form outer fixed points of the k = 3 urn,
/// y = 1/2 +- sqrt(12p^2 - 16p + 5) / (2(2p - 1)). Requires p > 5/6 and p <= 1.
AttractorPair attractors_k3(double p);

struct CriticalSet {
  /// The symmetric fixed point loses stability (absent for k = 1).
  std::optional<double> p_c;
  /// Slope at the governing attractor rises through 1/2.
  std::optional<double> p_star;
  /// Slope at the outer attractors falls back through 1/2 (k > 1 only).
  std::optional<double> p_star_star;
};

/// Closed forms for k in {1, 3}; nested root finding otherwise.
CriticalSet critical_params(int k);

/// Always by root finding on the urn function, whatever k is.
CriticalSet critical_params_numeric(int k);

/// k -> infinity: p_c = 1/2 and no slope thresholds.
CriticalSet critical_params_step_limit();

struct PhaseRow {
  double p = 0.0;
  std::vector<double> stable_x;
  std::vector<double> unstable_x;
  std::optional<double> x_minus;
  std::optional<double> x_zero;
  std::optional<double> x_plus;
  /// Sub-linear entropy band [x_minus, x_plus] when two attractors coexist.
  std::optional<double> band_lo;
  std::optional<double> band_hi;
  std::string regime;  // "single", "bistable" or "critical"
};

/// Phase structure of the majority-k urn over p_grid (each p in (1/2, 1)).
/// Rows follow the grid order; the sweep runs in parallel.
std::vector<PhaseRow> phase_diagram(int k, std::span<const double> p_grid);

}  // namespace erw
