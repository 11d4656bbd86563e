#include "erw/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "erw/error.hpp"
#include "erw/parallel.hpp"

namespace erw {

namespace {

constexpr int kScanCells = 10000;
constexpr double kDedup = 1e-9;
constexpr double kResidual = 1e-10;

// Bisection to machine precision; g(a) and g(b) must have opposite signs.
template <class G>
double bisect(G&& g, double a, double b) {
  double ga = g(a);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid <= std::min(a, b) || mid >= std::max(a, b)) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (ga < 0.0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return std::fabs(g(a)) <= std::fabs(g(b)) ? a : b;
}

// Golden-section minimum of |g| on [a, b].
template <class G>
double golden_min_abs(G&& g, double a, double b) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  for (int i = 0; i < 200 && (b - a) > 1e-15; ++i) {
    if (std::fabs(g(c)) < std::fabs(g(d))) {
      b = d;
    } else {
      a = c;
    }
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return 0.5 * (a + b);
}

Stability classify(double slope) {
  if (std::fabs(slope - 1.0) <= kTangentWindow) return Stability::Tangent;
  return slope < 1.0 ? Stability::Stable : Stability::Unstable;
}

std::vector<CrossingPoint> step_limit_crossings(const UrnFunction& f) {
  const double p = f.p();
  std::vector<CrossingPoint> out;
  if (p > 0.5) {
    const double inf = std::numeric_limits<double>::infinity();
    out.push_back({1.0 - p, 0.0, Stability::Stable});
    out.push_back({0.5, inf, Stability::Unstable});
    out.push_back({p, 0.0, Stability::Stable});
  } else if (p < 0.5) {
    out.push_back({0.5, -std::numeric_limits<double>::infinity(), Stability::Stable});
  } else {
    out.push_back({0.5, 0.0, Stability::Stable});
  }
  return out;
}

double largest_stable_root(const UrnFunction& f) {
  double best = -1.0;
  for (const auto& cp : find_crossings(f)) {
    if (cp.stability == Stability::Stable) best = std::max(best, cp.y_star);
  }
  return best;
}

}  // namespace

const char* to_string(Stability s) noexcept {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Tangent: return "tangent";
  }
  return "unknown";
}

std::vector<CrossingPoint> find_crossings(const UrnFunction& f) {
  if (f.variant() == UrnVariant::StepLimit) return step_limit_crossings(f);

  auto g = [&f](double y) { return f(y) - y; };
  std::vector<double> ys(kScanCells + 1);
  std::vector<double> gs(kScanCells + 1);
  for (int i = 0; i <= kScanCells; ++i) {
    ys[i] = static_cast<double>(i) / kScanCells;
    gs[i] = g(ys[i]);
  }

  std::vector<double> roots;
  for (int i = 0; i <= kScanCells; ++i) {
    if (gs[i] == 0.0) roots.push_back(ys[i]);
    if (i < kScanCells && gs[i] * gs[i + 1] < 0.0) roots.push_back(bisect(g, ys[i], ys[i + 1]));
    // touching roots leave no sign change; look for near-zero local minima of |g|
    if (i > 0 && i < kScanCells && gs[i] != 0.0 && gs[i - 1] * gs[i] > 0.0 &&
        gs[i] * gs[i + 1] > 0.0 && std::fabs(gs[i]) <= std::fabs(gs[i - 1]) &&
        std::fabs(gs[i]) <= std::fabs(gs[i + 1])) {
      const double y = golden_min_abs(g, ys[i - 1], ys[i + 1]);
      if (std::fabs(g(y)) <= kResidual) roots.push_back(y);
    }
  }
  std::sort(roots.begin(), roots.end());

  std::vector<CrossingPoint> out;
  for (double y : roots) {
    if (!out.empty() && y - out.back().y_star <= kDedup) continue;
    const double slope = f.derivative(y);
    out.push_back({y, slope, classify(slope)});
  }
  return out;
}

AttractorPair attractors_k3(double p) {
  if (!(p > 5.0 / 6.0 && p <= 1.0)) {
    throw Error(ErrorKind::NoBifurcation,
                fmt::format("k=3 has a single attractor for p={} (needs 5/6 < p <= 1)", p));
  }
  const double half_width = std::sqrt(12.0 * p * p - 16.0 * p + 5.0) / (2.0 * (2.0 * p - 1.0));
  AttractorPair a;
  a.y_minus = 0.5 - half_width;
  a.y_plus = 0.5 + half_width;
  a.x_minus = 2.0 * a.y_minus - 1.0;
  a.x_plus = 2.0 * a.y_plus - 1.0;
  return a;
}

CriticalSet critical_params(int k) {
  if (k == 1) return CriticalSet{std::nullopt, 0.75, std::nullopt};
  if (k == 3) return CriticalSet{5.0 / 6.0, 2.0 / 3.0, 11.0 / 12.0};
  return critical_params_numeric(k);
}

CriticalSet critical_params_numeric(int k) {
  (void)UrnFunction::majority(k, 0.75);  // validates k
  auto slope_at_half = [k](double p) { return UrnFunction::majority(k, p).derivative(0.5); };

  CriticalSet out;
  double upper = 1.0;
  // pi'(1/2) = (2p - 1) P_k'(1/2) increases with p; it reaches 1 below p = 1 iff k > 1
  if (slope_at_half(1.0) - 1.0 > kTangentWindow) {
    out.p_c = bisect([&](double p) { return slope_at_half(p) - 1.0; }, 0.5, 1.0);
    upper = *out.p_c;
  }
  out.p_star = bisect([&](double p) { return slope_at_half(p) - 0.5; }, 0.5, upper);

  if (out.p_c) {
    auto outer_slope = [k](double p) {
      const auto f = UrnFunction::majority(k, p);
      return f.derivative(largest_stable_root(f)) - 0.5;
    };
    // just above p_c the outer roots sit inside one scan cell of 1/2
    out.p_star_star = bisect(outer_slope, *out.p_c + 1e-3, 1.0);
  }
  return out;
}

CriticalSet critical_params_step_limit() { return CriticalSet{0.5, std::nullopt, std::nullopt}; }

std::vector<PhaseRow> phase_diagram(int k, std::span<const double> p_grid) {
  (void)UrnFunction::majority(k, 0.75);
  for (double p : p_grid) {
    if (!(p > 0.5 && p < 1.0)) {
      throw Error(ErrorKind::Domain, fmt::format("phase grid value p={} outside (1/2, 1)", p));
    }
  }
  std::vector<PhaseRow> rows(p_grid.size());
  const auto n = static_cast<std::int64_t>(p_grid.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (std::int64_t i = 0; i < n; ++i) {
    PhaseRow row;
    row.p = p_grid[static_cast<std::size_t>(i)];
    bool tangent = false;
    for (const auto& cp : find_crossings(UrnFunction::majority(k, row.p))) {
      const double x = 2.0 * cp.y_star - 1.0;
      if (std::fabs(x) <= 1e-9) row.x_zero = 0.0;
      if (cp.stability == Stability::Stable) row.stable_x.push_back(x);
      if (cp.stability == Stability::Unstable) row.unstable_x.push_back(x);
      tangent = tangent || cp.stability == Stability::Tangent;
    }
    if (row.stable_x.size() >= 2) {
      row.x_minus = row.stable_x.front();
      row.x_plus = row.stable_x.back();
      row.band_lo = row.x_minus;
      row.band_hi = row.x_plus;
      row.regime = "bistable";
    } else {
      row.regime = tangent ? "critical" : "single";
    }
    rows[static_cast<std::size_t>(i)] = std::move(row);
  }
  return rows;
}

}  // namespace erw
