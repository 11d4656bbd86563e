#include "erw/large_dev.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "erw/equilibria.hpp"
#include "erw/error.hpp"
#include "erw/log_math.hpp"
#include "erw/parallel.hpp"

namespace erw {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kSlopeSlack = 1e-9;

using State = std::array<double, 1>;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// In s = log(tau) the flow tau u' = pi(u) - u is autonomous.
struct Flow {
  const UrnFunction& f;
  void operator()(const State& u, State& du, double /*s*/) const {
    const double v = clamp01(u[0]);
    du[0] = f(v) - v;
  }
};

auto make_stepper(const LaunchOptions& opts) {
  return odeint::make_dense_output(opts.abs_tol, opts.rel_tol,
                                   odeint::runge_kutta_dopri5<State>());
}

// Distance from y_start to the next crossing (or the boundary) in `direction`.
double gap_to_next_crossing(const UrnFunction& f, double y_start, int direction) {
  double gap = direction > 0 ? 1.0 - y_start : y_start;
  for (const auto& cp : find_crossings(f)) {
    const double d = (cp.y_star - y_start) * direction;
    if (d > 1e-9) gap = std::min(gap, d);
  }
  return gap;
}

// Shared launch checks; returns the gap to the next crossing.
double check_launch(const UrnFunction& f, double y_start, int direction, double eps,
                    const LaunchOptions& opts) {
  if (!f.is_smooth()) {
    throw Error(ErrorKind::Unsupported, "zero-cost trajectories need a differentiable urn function");
  }
  if (direction != 1 && direction != -1) {
    throw Error(ErrorKind::InvalidParameter, fmt::format("direction must be +1 or -1, got {}", direction));
  }
  if (!(y_start > 0.0 && y_start < 1.0)) {
    throw Error(ErrorKind::Domain, fmt::format("start point {} outside (0, 1)", y_start));
  }
  if (!(opts.launch_time > 0.0 && opts.launch_time < 1.0)) {
    throw Error(ErrorKind::InvalidParameter,
                fmt::format("launch time {} outside (0, 1)", opts.launch_time));
  }
  if (std::fabs(f(y_start) - y_start) > 1e-10) {
    throw Error(ErrorKind::Domain, fmt::format("y={} is not a fixed point of pi", y_start));
  }
  const double slope = f.derivative(y_start);
  if (slope <= 1.0) {
    throw Error(ErrorKind::NoEscape,
                fmt::format("fixed point y={} has slope {} <= 1; the flow returns to it", y_start,
                            slope));
  }
  const double gap = gap_to_next_crossing(f, y_start, direction);
  if (!(eps >= 0.0 && eps < gap)) {
    throw Error(ErrorKind::Domain,
                fmt::format("launch offset {} must lie in [0, {}) to stay short of the next crossing",
                            eps, gap));
  }
  return gap;
}

double endpoint_unchecked(const UrnFunction& f, double u0, const LaunchOptions& opts) {
  State u{u0};
  const double s_end = -std::log(opts.launch_time);
  odeint::integrate_adaptive(make_stepper(opts), Flow{f}, u, 0.0, s_end, 1e-3);
  return clamp01(u[0]);
}

Trajectory trajectory_unchecked(const UrnFunction& f, double y_start, double u0, int cells,
                                const LaunchOptions& opts) {
  Trajectory traj;
  traj.tau.resize(static_cast<std::size_t>(cells) + 1);
  traj.u.assign(traj.tau.size(), y_start);
  for (int i = 0; i <= cells; ++i) traj.tau[static_cast<std::size_t>(i)] = static_cast<double>(i) / cells;

  // grid points past the launch, as s = log(tau / launch_time)
  std::vector<double> s_times{0.0};
  std::size_t first = 0;
  while (first < traj.tau.size() && traj.tau[first] < opts.launch_time) ++first;
  for (std::size_t i = first; i < traj.tau.size(); ++i) {
    s_times.push_back(std::log(traj.tau[i] / opts.launch_time));
  }
  if (s_times.size() > 1 && s_times[1] == 0.0) s_times.erase(s_times.begin());

  State u{u0};
  std::vector<double> values;
  values.reserve(s_times.size());
  if (u0 == y_start) {
    values.assign(s_times.size(), y_start);
  } else {
    odeint::integrate_times(make_stepper(opts), Flow{f}, u, s_times.begin(), s_times.end(), 1e-3,
                            [&values](const State& x, double) { values.push_back(clamp01(x[0])); });
  }
  const std::size_t offset = values.size() - (traj.tau.size() - first);
  for (std::size_t i = first; i < traj.tau.size(); ++i) traj.u[i] = values[offset + (i - first)];

  traj.phi.resize(traj.tau.size());
  for (std::size_t i = 0; i < traj.tau.size(); ++i) traj.phi[i] = traj.tau[i] * traj.u[i];
  // u(0+) is the slope of the first cell
  if (cells > 0) traj.u[0] = traj.phi[1] / traj.tau[1];
  return traj;
}

double rate_on(const UrnFunction& f, const Trajectory& traj, std::size_t stride) {
  double total = 0.0;
  for (std::size_t i = 0; i + stride < traj.tau.size(); i += stride) {
    const double ta = traj.tau[i];
    const double tb = traj.tau[i + stride];
    const double dt = tb - ta;
    const double slope = clamp01((traj.phi[i + stride] - traj.phi[i]) / dt);
    const double ua = i == 0 ? slope : clamp01(traj.phi[i] / ta);
    const double ub = clamp01(traj.phi[i + stride] / tb);
    total -= dt * 0.5 * (local_cost(slope, f(ua)) + local_cost(slope, f(ub)));
  }
  return total;
}

void check_mesh(const BellmanMesh& mesh) {
  if (mesh.time_steps < 200 || mesh.phi_steps < 400 || mesh.phi_steps % mesh.time_steps != 0) {
    throw Error(ErrorKind::InvalidParameter,
                fmt::format("Bellman mesh needs time_steps >= 200 and phi_steps >= 400 with "
                            "phi_steps a multiple of time_steps, got {} x {}",
                            mesh.time_steps, mesh.phi_steps));
  }
}

VariationalEntropy run_bellman(const UrnFunction& f, std::span<const double> y_grid,
                               const BellmanMesh& mesh, bool parallel) {
  check_mesh(mesh);
  for (double y : y_grid) {
    if (!(y >= 0.0 && y <= 1.0)) {
      throw Error(ErrorKind::Domain, fmt::format("entropy grid point {} outside [0, 1]", y));
    }
  }
  const std::int64_t steps = mesh.time_steps;
  const std::int64_t width = mesh.phi_steps;
  const std::int64_t r = width / steps;  // largest increment, slope 1
  const double dt = 1.0 / static_cast<double>(steps);

  // alpha log alpha + (1 - alpha) log(1 - alpha) for each slope m / r
  std::vector<double> alpha(static_cast<std::size_t>(r) + 1);
  std::vector<double> neg_entropy(alpha.size());
  for (std::int64_t m = 0; m <= r; ++m) {
    const double a = static_cast<double>(m) / static_cast<double>(r);
    alpha[static_cast<std::size_t>(m)] = a;
    double h = 0.0;
    if (m > 0) h += a * std::log(a);
    if (m < r) h += (1.0 - a) * std::log1p(-a);
    neg_entropy[static_cast<std::size_t>(m)] = h;
  }

  std::vector<double> cur(static_cast<std::size_t>(width) + 1, kNegInf);
  std::vector<double> next(cur.size(), kNegInf);
  // log pi and log(1 - pi) at midpoint densities h / (r (2i + 1)), h = 2j + m
  std::vector<double> lb(static_cast<std::size_t>(r * (2 * steps + 1)) + 1);
  std::vector<double> lw(lb.size());
  cur[0] = 0.0;

  for (std::int64_t i = 0; i < steps; ++i) {
    const std::int64_t h_max = r * (2 * i + 1);
    const std::int64_t reach = (i + 1) * r;
    const double* pcur = cur.data();
    double* pnext = next.data();
    double* plb = lb.data();
    double* plw = lw.data();
    const double* pa = alpha.data();
    const double* pe = neg_entropy.data();

#pragma omp parallel if (parallel) num_threads(thread_count())
    {
#pragma omp for schedule(static)
      for (std::int64_t h = 0; h <= h_max; ++h) {
        const double q = f(static_cast<double>(h) / static_cast<double>(h_max));
        plb[h] = std::log(q);
        plw[h] = std::log1p(-q);
      }
#pragma omp for schedule(static)
      for (std::int64_t jn = 0; jn <= reach; ++jn) {
        double best = kNegInf;
        const std::int64_t m_lo = std::max<std::int64_t>(0, jn - i * r);
        const std::int64_t m_hi = std::min(r, jn);
        for (std::int64_t m = m_lo; m <= m_hi; ++m) {
          const double prev = pcur[jn - m];
          if (prev == kNegInf) continue;
          const std::int64_t h = 2 * jn - m;
          double gain;
          if (m == 0) {
            gain = plw[h];
          } else if (m == r) {
            gain = plb[h];
          } else {
            gain = pa[m] * plb[h] + (1.0 - pa[m]) * plw[h] - pe[m];
          }
          best = std::max(best, prev + dt * gain);
        }
        pnext[jn] = best;
      }
    }
    cur.swap(next);
  }

  VariationalEntropy out;
  out.mesh = mesh;
  for (double y : y_grid) {
    const auto j = static_cast<std::size_t>(std::llround(y * static_cast<double>(width)));
    out.y.push_back(y);
    out.phi.push_back(std::min(0.0, cur[j]));
  }
  return out;
}

}  // namespace

double local_cost(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorKind::Domain,
                fmt::format("local cost needs alpha, beta in [0, 1], got ({}, {})", alpha, beta));
  }
  if (alpha == beta) return 0.0;
  double total = 0.0;
  if (alpha > 0.0) total += alpha * std::log(beta / alpha);
  if (alpha < 1.0) total += (1.0 - alpha) * std::log((1.0 - beta) / (1.0 - alpha));
  return std::min(total, 0.0);
}

void Trajectory::validate() const {
  const std::size_t n = tau.size();
  if (n < 2 || phi.size() != n || (!u.empty() && u.size() != n)) {
    throw Error(ErrorKind::InvalidTrajectory,
                fmt::format("trajectory needs at least 2 points and matching columns "
                            "(tau {}, phi {}, u {})", tau.size(), phi.size(), u.size()));
  }
  const double cells = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(tau[i] - static_cast<double>(i) / cells) > 1e-9) {
      throw Error(ErrorKind::InvalidTrajectory,
                  fmt::format("tau[{}] = {} is not on the uniform grid of [0, 1]", i, tau[i]));
    }
  }
  if (std::fabs(phi[0]) > 1e-12) {
    throw Error(ErrorKind::InvalidTrajectory, fmt::format("phi(0) = {} must be 0", phi[0]));
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double slope = (phi[i + 1] - phi[i]) / (tau[i + 1] - tau[i]);
    if (!(slope >= -kSlopeSlack && slope <= 1.0 + kSlopeSlack)) {
      throw Error(ErrorKind::InvalidTrajectory,
                  fmt::format("slope {} on cell {} outside [0, 1]", slope, i));
    }
  }
}

Trajectory straight_line(double y, int cells) {
  if (!(y >= 0.0 && y <= 1.0)) throw Error(ErrorKind::Domain, fmt::format("endpoint {} outside [0, 1]", y));
  if (cells < 1) throw Error(ErrorKind::InvalidParameter, "a trajectory needs at least one cell");
  Trajectory traj;
  for (int i = 0; i <= cells; ++i) {
    const double t = static_cast<double>(i) / cells;
    traj.tau.push_back(t);
    traj.phi.push_back(y * t);
    traj.u.push_back(y);
  }
  return traj;
}

RateValue rate_functional(const UrnFunction& f, const Trajectory& traj) {
  traj.validate();
  RateValue out;
  out.value = rate_on(f, traj, 1);
  const std::size_t cells = traj.tau.size() - 1;
  if (cells % 2 == 0) {
    out.error_estimate = std::fabs(out.value - rate_on(f, traj, 2)) / 3.0;
  } else {
    out.error_estimate = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

Trajectory zero_cost_trajectory(const UrnFunction& f, double y_start, int direction, double eps,
                                int cells, const LaunchOptions& opts) {
  if (cells < 1) throw Error(ErrorKind::InvalidParameter, "a trajectory needs at least one cell");
  check_launch(f, y_start, direction, eps, opts);
  return trajectory_unchecked(f, y_start, y_start + direction * eps, cells, opts);
}

double zero_cost_endpoint(const UrnFunction& f, double y_start, int direction, double eps,
                          const LaunchOptions& opts) {
  check_launch(f, y_start, direction, eps, opts);
  return endpoint_unchecked(f, y_start + direction * eps, opts);
}

double zero_cost_offset_for(const UrnFunction& f, double y_start, int direction, double target,
                            const LaunchOptions& opts) {
  const double gap = check_launch(f, y_start, direction, 0.0, opts);
  const double reach = (target - y_start) * direction;
  if (!(reach > 0.0 && reach < gap)) {
    throw Error(ErrorKind::Domain,
                fmt::format("target {} is not between y={} and the next crossing", target, y_start));
  }
  // the endpoint map is increasing in eps (trajectories do not cross)
  double lo = 0.0;
  double hi = gap;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double end = endpoint_unchecked(f, y_start + direction * mid, opts);
    if ((end - y_start) * direction < reach) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<Trajectory> zero_cost_family(const UrnFunction& f, double y_start, int direction,
                                         std::span<const double> eps, int cells,
                                         const LaunchOptions& opts) {
  if (cells < 1) throw Error(ErrorKind::InvalidParameter, "a trajectory needs at least one cell");
  for (double e : eps) check_launch(f, y_start, direction, e, opts);
  std::vector<Trajectory> out(eps.size());
  const auto n = static_cast<std::int64_t>(eps.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out[idx] = trajectory_unchecked(f, y_start, y_start + direction * eps[idx], cells, opts);
  }
  return out;
}

VariationalEntropy entropy_variational(const UrnFunction& f, std::span<const double> y_grid,
                                       const BellmanMesh& mesh) {
  return run_bellman(f, y_grid, mesh, true);
}

VariationalEntropy entropy_variational_serial(const UrnFunction& f,
                                              std::span<const double> y_grid,
                                              const BellmanMesh& mesh) {
  return run_bellman(f, y_grid, mesh, false);
}

}  // namespace erw
