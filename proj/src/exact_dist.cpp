#include "erw/exact_dist.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "erw/equilibria.hpp"
#include "erw/error.hpp"
#include "erw/log_math.hpp"
#include "erw/parallel.hpp"

namespace erw {

namespace {

constexpr std::int64_t kParallelWidth = 4096;

void check_budget(std::int64_t horizon) {
  // current and next slices plus the two per-slice log-probability rows
  const double bytes = 4.0 * 8.0 * (static_cast<double>(horizon) + 1.0);
  if (bytes > static_cast<double>(kDistributionMemoryBudget)) {
    throw Error(ErrorKind::Resource,
                fmt::format("horizon {} needs {:.3g} GiB of workspace, budget is {:.3g} GiB", horizon,
                            bytes / (1 << 30),
                            static_cast<double>(kDistributionMemoryBudget) / (1 << 30)));
  }
}

class ForwardKernel {
 public:
  ForwardKernel(const UrnFunction& f, ProcessState initial, std::int64_t max_horizon)
      : f_(f), initial_(initial), t_(initial.t) {
    initial.validate();
    if (max_horizon < initial.t) {
      throw Error(ErrorKind::InvalidState,
                  fmt::format("horizon {} is before the initial time {}", max_horizon, initial.t));
    }
    check_budget(max_horizon);
    const auto size = static_cast<std::size_t>(max_horizon + 1);
    cur_.assign(size, kNegInf);
    next_.assign(size, kNegInf);
    log_black_.assign(size, kNegInf);
    log_white_.assign(size, kNegInf);
    cur_[static_cast<std::size_t>(initial.c)] = 0.0;
  }

  std::int64_t time() const noexcept { return t_; }

  void advance(bool parallel) {
    const std::int64_t lo = initial_.c;
    const std::int64_t hi = initial_.c + (t_ - initial_.t);
    const double t = static_cast<double>(t_);
    double* cur = cur_.data();
    double* next = next_.data();
    double* lb = log_black_.data();
    double* lw = log_white_.data();
    const UrnFunction& f = f_;
    const bool wide = parallel && (hi - lo) >= kParallelWidth;

#pragma omp parallel if (wide) num_threads(thread_count())
    {
#pragma omp for schedule(static)
      for (std::int64_t c = lo; c <= hi; ++c) {
        const double q = f(static_cast<double>(c) / t);
        lb[c] = std::log(q);
        lw[c] = std::log1p(-q);
      }
#pragma omp for schedule(static)
      for (std::int64_t c = lo; c <= hi + 1; ++c) {
        const double stay = c <= hi ? cur[c] + lw[c] : kNegInf;
        const double move = c > lo ? cur[c - 1] + lb[c - 1] : kNegInf;
        next[c] = log_add_exp(stay, move);
      }
    }
    cur_.swap(next_);
    ++t_;
  }

  DistributionTable snapshot() const {
    DistributionTable table;
    table.horizon = t_;
    table.initial = initial_;
    table.log_prob.assign(cur_.begin(), cur_.begin() + (t_ + 1));
    return table;
  }

 private:
  const UrnFunction& f_;
  ProcessState initial_;
  std::int64_t t_;
  std::vector<double> cur_;
  std::vector<double> next_;
  std::vector<double> log_black_;
  std::vector<double> log_white_;
};

DistributionTable run_forward(const UrnFunction& f, ProcessState initial, std::int64_t horizon,
                              bool parallel) {
  ForwardKernel kernel(f, initial, horizon);
  while (kernel.time() < horizon) kernel.advance(parallel);
  return kernel.snapshot();
}

}  // namespace

double DistributionTable::log_total() const { return log_sum_exp(log_prob); }

DistributionTable forward_distribution(const UrnFunction& f, ProcessState initial,
                                       std::int64_t horizon) {
  return run_forward(f, initial, horizon, true);
}

DistributionTable forward_distribution_serial(const UrnFunction& f, ProcessState initial,
                                              std::int64_t horizon) {
  return run_forward(f, initial, horizon, false);
}

std::vector<DistributionTable> forward_distribution_snapshots(const UrnFunction& f,
                                                              ProcessState initial,
                                                              std::span<const std::int64_t> horizons) {
  if (horizons.empty()) return {};
  if (!std::is_sorted(horizons.begin(), horizons.end())) {
    throw Error(ErrorKind::InvalidParameter, "snapshot horizons must be ascending");
  }
  ForwardKernel kernel(f, initial, horizons.back());
  std::vector<DistributionTable> out;
  out.reserve(horizons.size());
  for (std::int64_t n : horizons) {
    if (n < initial.t) {
      throw Error(ErrorKind::InvalidState,
                  fmt::format("horizon {} is before the initial time {}", n, initial.t));
    }
    while (kernel.time() < n) kernel.advance(true);
    out.push_back(kernel.snapshot());
  }
  return out;
}

std::int64_t lattice_count(double y, std::int64_t n) {
  return static_cast<std::int64_t>(std::nearbyint(y * static_cast<double>(n)));
}

EntropyCurve entropy_estimate(const UrnFunction& f, ProcessState initial, std::int64_t n1,
                              std::int64_t n2, std::span<const double> y_grid) {
  if (!(n1 > 0 && n2 > n1)) {
    throw Error(ErrorKind::InvalidParameter,
                fmt::format("entropy horizons need 0 < N1 < N2, got {} and {}", n1, n2));
  }
  for (double y : y_grid) {
    if (!(y >= 0.0 && y <= 1.0)) {
      throw Error(ErrorKind::Domain, fmt::format("entropy grid point {} outside [0, 1]", y));
    }
  }
  const std::int64_t horizons[] = {n1, n2};
  const auto tables = forward_distribution_snapshots(f, initial, horizons);

  EntropyCurve curve;
  curve.n1 = n1;
  curve.n2 = n2;
  for (double y : y_grid) {
    const double a = tables[0].log_prob[static_cast<std::size_t>(lattice_count(y, n1))] / n1;
    const double b = tables[1].log_prob[static_cast<std::size_t>(lattice_count(y, n2))] / n2;
    curve.y.push_back(y);
    curve.phi_n1.push_back(a);
    curve.phi_n2.push_back(b);
    // -inf at either horizon leaves no finite extrapolation
    curve.phi_extrap.push_back(a == kNegInf || b == kNegInf ? kNegInf : 2.0 * b - a);
    curve.reachable.push_back(a != kNegInf || b != kNegInf);
  }
  return curve;
}

WindowScaling window_mass_scaling(const UrnFunction& f, ProcessState initial, double y1,
                                  double y2, std::span<const std::int64_t> horizons) {
  if (!(0.0 <= y1 && y1 < y2 && y2 <= 1.0)) {
    throw Error(ErrorKind::Domain, fmt::format("window ({}, {}) is not inside [0, 1]", y1, y2));
  }
  if (horizons.size() < 4) {
    throw Error(ErrorKind::InvalidParameter, "window scaling needs at least four horizons");
  }
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (horizons[i] <= horizons[i - 1]) {
      throw Error(ErrorKind::InvalidParameter, "window scaling horizons must be increasing");
    }
  }

  WindowScaling out;
  out.horizons.assign(horizons.begin(), horizons.end());
  if (f.is_smooth()) {
    for (const auto& cp : find_crossings(f)) {
      if (cp.stability == Stability::Stable && cp.y_star >= y1 && cp.y_star <= y2) {
        out.contains_attractor = true;
        out.warning = fmt::format(
            "window ({}, {}) contains the stable crossing y={:.6f}; the power law does not apply",
            y1, y2, cp.y_star);
      }
    }
  }

  const auto tables = forward_distribution_snapshots(f, initial, horizons);
  std::vector<double> xs;
  for (const auto& table : tables) {
    const double n = static_cast<double>(table.horizon);
    std::vector<double> inside;
    for (std::int64_t c = 0; c <= table.horizon; ++c) {
      const double y = static_cast<double>(c) / n;
      if (y > y1 && y < y2) inside.push_back(table.log_prob[static_cast<std::size_t>(c)]);
    }
    out.log_mass.push_back(log_sum_exp(inside));
    xs.push_back(std::log(n));
  }

  const double m = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += out.log_mass[i];
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (out.log_mass[i] - my);
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  return out;
}

}  // namespace erw
