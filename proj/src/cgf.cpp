#include "erw/cgf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "erw/error.hpp"
#include "erw/log_math.hpp"

namespace erw {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kInverseSlack = 1e-8;

void check_grid(std::span<const double> lambda, bool allow_zero) {
  if (lambda.empty()) throw Error(ErrorKind::InvalidParameter, "lambda grid is empty");
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double l = lambda[i];
    const bool ok = std::isfinite(l) && (allow_zero ? l >= 0.0 : l > 0.0);
    if (!ok) throw Error(ErrorKind::Domain, fmt::format("lambda = {} outside the grid domain", l));
    if (i > 0 && !(l > lambda[i - 1])) {
      throw Error(ErrorKind::InvalidParameter, "lambda grid must be strictly ascending");
    }
  }
}

void check_linear_p(double p) {
  if (!(p > 0.5 && p < 1.0)) {
    throw Error(ErrorKind::Domain, fmt::format("p = {} outside (1/2, 1)", p));
  }
}

using State = std::array<double, 1>;

struct CgfFlow {
  const UrnFunction& f;
  double lo;
  double hi;
  // worst excursion of R outside [lo, hi] seen at accepted states
  double* excursion;

  double argument(double zeta, double lambda) const {
    return std::expm1(zeta) / std::expm1(-lambda);
  }

  void operator()(const State& z, State& dz, double lambda) const {
    const double r = std::clamp(argument(z[0], lambda), lo, hi);
    dz[0] = -f.inverse(r);
  }

  void check(const State& z, double lambda) const {
    const double r = argument(z[0], lambda);
    *excursion = std::max({*excursion, lo - r, r - hi});
  }
};

}  // namespace

const char* to_string(CgfMethod m) noexcept {
  switch (m) {
    case CgfMethod::FiniteN: return "finite_n";
    case CgfMethod::Ode: return "ode";
    case CgfMethod::ClosedForm: return "closed_form";
  }
  return "unknown";
}

CgfCurve cgf_finite_n(const DistributionTable& table, std::span<const double> lambda) {
  check_grid(lambda, true);
  if (table.horizon <= 0) throw Error(ErrorKind::InvalidParameter, "empty distribution table");
  const double n = static_cast<double>(table.horizon);
  const double log_norm = table.log_total();
  CgfCurve curve;
  curve.method = CgfMethod::FiniteN;
  std::vector<double> terms(table.log_prob.size());
  for (double l : lambda) {
    for (std::size_t c = 0; c < terms.size(); ++c) {
      terms[c] = table.log_prob[c] == kNegInf ? kNegInf : table.log_prob[c] - l * static_cast<double>(c);
    }
    curve.lambda.push_back(l);
    curve.zeta.push_back((log_sum_exp(terms) - log_norm) / n);
  }
  return curve;
}

CgfCurve cgf_finite_n(const UrnFunction& f, ProcessState initial, std::int64_t horizon,
                      std::span<const double> lambda) {
  return cgf_finite_n(forward_distribution(f, initial, horizon), lambda);
}

CgfCurve cgf_ode(const UrnFunction& f, std::span<const double> lambda, const CgfOdeOptions& opts) {
  check_grid(lambda, false);
  if (!f.is_increasing()) {
    throw Error(ErrorKind::Unsupported, "the CGF equation needs a strictly increasing urn function");
  }
  const double pi0 = f(0.0);
  const double pi1 = f(1.0);
  if (!(pi0 > 0.0)) {
    throw Error(ErrorKind::Domain, "the CGF equation needs pi(0) > 0 (finite zeta at infinity)");
  }

  // zeta = log(1 - pi0) + A e^-lambda + ..., A = pi0 / (1 - pi0 + pi'(0))
  const double start = std::max(opts.lambda_seed, lambda.back());
  const double amp = pi0 / ((1.0 - pi0) + f.derivative(0.0));
  State z{std::log1p(-pi0) + amp * std::exp(-start)};

  double excursion = -std::numeric_limits<double>::infinity();
  const CgfFlow flow{f, pi0, pi1, &excursion};

  CgfCurve curve;
  curve.method = CgfMethod::Ode;
  curve.lambda.assign(lambda.begin(), lambda.end());
  curve.zeta.assign(lambda.size(), 0.0);

  // descending times; the controlled stepper lands on each grid value
  std::vector<double> times{start};
  for (auto it = lambda.rbegin(); it != lambda.rend(); ++it) {
    if (*it < start) times.push_back(*it);
  }
  std::size_t out = lambda.size();
  auto observe = [&](const State& at, double l) {
    if (l == start && lambda.back() < start) return;
    flow.check(at, l);
    curve.zeta[--out] = at[0];
  };
  odeint::integrate_times(
      odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>()),
      flow, z, times.begin(), times.end(), -1e-3, observe);
  if (excursion > kInverseSlack) {
    throw Error(ErrorKind::ConventionMismatch,
                fmt::format("inverse argument left [{}, {}] by {:.3g}", pi0, pi1, excursion));
  }
  return curve;
}

double cgf_closed_form_k1(double p, double lambda) {
  check_linear_p(p);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::Domain, fmt::format("lambda = {} must be positive", lambda));
  }
  const double b = (1.0 - p) / (2.0 * p - 1.0);
  const double c = 1.0 / (2.0 * p - 1.0);
  const double em1 = std::expm1(lambda);

  // 1 - g^c with 1/g = (1 - e^-lambda w) / t0 = 1 + (1 - w) / (e^lambda - 1),
  // w = v^{1/b}; xc is the distance to the nearer endpoint, which keeps log v
  // accurate as v -> 1
  auto integrand = [&](double v, double xc) {
    const double log_v = v > 0.5 ? std::log1p(-xc) : std::log(v);
    const double log_g = -std::log1p(-std::expm1(log_v / b) / em1);
    return -std::expm1(c * log_g);
  };
  boost::math::quadrature::tanh_sinh<double> quad;
  double err = 0.0;
  const double integral = quad.integrate(integrand, 0.0, 1.0, 1e-14, &err);
  return -lambda - std::log(integral);
}

CgfCurve cgf_closed_form_k1(double p, std::span<const double> lambda) {
  check_linear_p(p);
  check_grid(lambda, false);
  CgfCurve curve;
  curve.method = CgfMethod::ClosedForm;
  for (double l : lambda) {
    curve.lambda.push_back(l);
    curve.zeta.push_back(cgf_closed_form_k1(p, l));
  }
  return curve;
}

LegendreCurve legendre(const CgfCurve& curve, std::span<const double> y_grid) {
  if (curve.lambda.size() != curve.zeta.size() || curve.lambda.size() < 3) {
    throw Error(ErrorKind::InvalidParameter, "Legendre transform needs a curve with at least 3 points");
  }
  check_grid(curve.lambda, true);
  // lambda = 0, zeta = 0 anchors the transform
  std::vector<double> xs{0.0};
  std::vector<double> zs{0.0};
  for (std::size_t i = 0; i < curve.lambda.size(); ++i) {
    if (curve.lambda[i] == 0.0) continue;
    xs.push_back(curve.lambda[i]);
    zs.push_back(curve.zeta[i]);
  }
  const std::size_t n = xs.size();

  LegendreCurve out;
  std::vector<double> g(n);
  for (double y : y_grid) {
    if (!(y >= 0.0 && y <= 1.0)) {
      throw Error(ErrorKind::Domain, fmt::format("Legendre grid point {} outside [0, 1]", y));
    }
    for (std::size_t i = 0; i < n; ++i) g[i] = xs[i] * y + zs[i];
    const auto best = static_cast<std::size_t>(std::min_element(g.begin(), g.end()) - g.begin());
    double value = g[best];
    if (best > 0 && best + 1 < n) {
      // parabola through the three points around the discrete minimum
      const double x0 = xs[best - 1], x1 = xs[best], x2 = xs[best + 1];
      const double g0 = g[best - 1], g1 = g[best], g2 = g[best + 1];
      const double d01 = (g1 - g0) / (x1 - x0);
      const double d12 = (g2 - g1) / (x2 - x1);
      const double a = (d12 - d01) / (x2 - x0);
      if (a > 0.0) {
        const double slope1 = d01 + a * (x1 - x0);  // derivative at x1
        const double xv = std::clamp(x1 - slope1 / (2.0 * a), x0, x2);
        const double gv = g1 + slope1 * (xv - x1) + a * (xv - x1) * (xv - x1);
        value = std::min(value, gv);
      }
    }
    const bool edge = best + 1 == n;
    out.y.push_back(y);
    out.phi.push_back(std::min(value, 0.0));
    out.at_boundary.push_back(edge);
    out.warning = out.warning || edge;
  }
  return out;
}

SingularityReport singularity_report(double p) {
  check_linear_p(p);
  SingularityReport r;
  r.p = p;
  r.exponent = 1.0 / (2.0 * p - 1.0);
  const double nearest = std::round(r.exponent);
  r.integer_exponent = std::fabs(r.exponent - nearest) <= 1e-9;
  r.first_singular_derivative =
      static_cast<int>(r.integer_exponent ? nearest : std::ceil(r.exponent));
  return r;
}

CurvatureProbe cgf_curvature_probe(const UrnFunction& f, ProcessState initial,
                                   std::span<const std::int64_t> horizons, double h) {
  if (horizons.size() < 2) {
    throw Error(ErrorKind::InvalidParameter, "curvature probe needs at least two horizons");
  }
  if (!(h > 0.0)) throw Error(ErrorKind::Domain, fmt::format("step h = {} must be positive", h));
  const auto tables = forward_distribution_snapshots(f, initial, horizons);
  const double grid[] = {0.0, h, 2.0 * h};

  CurvatureProbe probe;
  probe.horizons.assign(horizons.begin(), horizons.end());
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& table : tables) {
    const auto z = cgf_finite_n(table, grid).zeta;
    const double d2 = (z[2] - 2.0 * z[1] + z[0]) / (h * h);
    probe.second_difference.push_back(d2);
    xs.push_back(std::log(static_cast<double>(table.horizon)));
    ys.push_back(std::log(d2));
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / m;
    my += ys[i] / m;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  probe.slope = sxy / sxx;
  return probe;
}

}  // namespace erw
