#pragma once

// Large deviations of the urn density: the local cost L, the rate functional
// over trajectories tau -> phi(tau), the zero-cost trajectory flow, and a
// lattice Bellman solver for the entropy phi(y) = -inf I.

#include <span>
#include <vector>

#include "erw/urn_function.hpp"

namespace erw {

/// L(a, b) = a log(b/a) + (1-a) log((1-b)/(1-a)) with 0 log 0 = 0.
/// Non-positive, zero iff a == b; -inf when b is 0 or 1 and a differs.
double local_cost(double alpha, double beta);

/// Piecewise-linear path on a uniform grid of [0, 1]. `u` = phi / tau, with
/// u[0] the tau -> 0 limit.
struct Trajectory {
  std::vector<double> tau;
  std::vector<double> phi;
  std::vector<double> u;

  double endpoint() const { return phi.back(); }
  /// Throws ErrorKind::InvalidTrajectory unless the path starts at 0 on a
  /// uniform grid of [0, 1] and every chord slope lies in [0, 1] (1e-9 slack).
  void validate() const;
};

/// phi(tau) = y tau on `cells` uniform cells.
Trajectory straight_line(double y, int cells);

struct RateValue {
  /// -integral of L(phi', pi(phi / tau)); non-negative.
  double value = 0.0;
  /// |I_h - I_2h| / 3 from the same trajectory at half resolution.
  double error_estimate = 0.0;
};

/// Trapezoid rule on the trajectory's own grid. On each cell phi' is the chord
/// slope; the first cell uses u(0+) = that slope.
RateValue rate_functional(const UrnFunction& f, const Trajectory& traj);

struct LaunchOptions {
  /// Time at which the path leaves the fixed point.
  double launch_time = 1e-6;
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
};

/// Integrates tau u' = pi(u) - u from u(launch_time) = y_start + direction * eps
/// to tau = 1 and samples it on `cells` uniform cells; u = y_start before the
/// launch. y_start must be an unstable fixed point of a smooth f, and the
/// launch point must stay short of the next crossing in that direction.
Trajectory zero_cost_trajectory(const UrnFunction& f, double y_start, int direction, double eps,
                                int cells, const LaunchOptions& opts = {});

/// u(1) for the same launch, without sampling the path.
double zero_cost_endpoint(const UrnFunction& f, double y_start, int direction, double eps,
                          const LaunchOptions& opts = {});

/// Launch offset whose trajectory ends at `target` (bisection on the
/// monotone endpoint map). `target` must lie strictly between y_start and the
/// next crossing in `direction`.
double zero_cost_offset_for(const UrnFunction& f, double y_start, int direction, double target,
                            const LaunchOptions& opts = {});

/// Trajectories for each offset, computed in parallel, returned in input order.
std::vector<Trajectory> zero_cost_family(const UrnFunction& f, double y_start, int direction,
                                         std::span<const double> eps, int cells,
                                         const LaunchOptions& opts = {});

struct BellmanMesh {
  int time_steps = 200;
  /// Lattice points on phi in [0, 1]; a multiple of time_steps so that every
  /// slope m / (phi_steps / time_steps) is lattice-aligned.
  int phi_steps = 8000;
};

struct VariationalEntropy {
  std::vector<double> y;
  std::vector<double> phi;
  BellmanMesh mesh;
};

/// phi(y) = max over lattice paths from (0, 0) to (1, y) of
/// sum dtau L(slope, pi(u_mid)), where u_mid is phi / tau at the midpoint of
/// each step. Runs forward over tau, so one pass serves every y. The count
/// loop is parallel.
VariationalEntropy entropy_variational(const UrnFunction& f, std::span<const double> y_grid,
                                       const BellmanMesh& mesh = {});

/// Single-threaded reference of entropy_variational.
VariationalEntropy entropy_variational_serial(const UrnFunction& f,
                                              std::span<const double> y_grid,
                                              const BellmanMesh& mesh = {});

}  // namespace erw
