#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "erw/cgf.hpp"
#include "erw/equilibria.hpp"
#include "erw/error.hpp"
#include "erw/exact_dist.hpp"

using namespace erw;

namespace {

// Interval-halving Romberg on [a, b].
double romberg(const std::function<double(double)>& g, double a, double b) {
  std::vector<double> prev{0.5 * (b - a) * (g(a) + g(b))};
  for (int level = 1; level < 22; ++level) {
    const double h = (b - a) / std::pow(2.0, level);
    double mid = 0.0;
    for (long i = 1; i < (1L << level); i += 2) mid += g(a + static_cast<double>(i) * h);
    std::vector<double> cur{0.5 * prev[0] + h * mid};
    double factor = 1.0;
    for (int j = 1; j <= level; ++j) {
      factor *= 4.0;
      cur.push_back(cur[j - 1] + (cur[j - 1] - prev[j - 1]) / (factor - 1.0));
    }
    if (level > 4 && std::fabs(cur.back() - prev.back()) < 1e-15 * std::fabs(cur.back())) {
      return cur.back();
    }
    prev = cur;
  }
  return prev.back();
}

// Linear-urn CGF from exp(-zeta) = c e^{(c-b) lambda} t0^c int_{t0}^1 t^{-c-1} (1-t)^b dt,
// after 1 - t = e^{-lambda} s^6, which leaves a smooth integrand on [0, 1].
double oracle_zeta(double p, double lambda) {
  const double b = (1.0 - p) / (2.0 * p - 1.0);
  const double c = 1.0 / (2.0 * p - 1.0);
  const double t0 = 1.0 - std::exp(-lambda);
  const int m = 6;
  const double k = romberg(
      [&](double s) {
        return m * std::pow(s, m * (b + 1.0) - 1.0) *
               std::pow(1.0 - std::exp(-lambda) * std::pow(s, m), -c - 1.0);
      },
      0.0, 1.0);
  return -std::log(c) - c * std::log(t0) - std::log(k);
}

void check_shape(const CgfCurve& curve) {
  for (std::size_t i = 0; i < curve.zeta.size(); ++i) {
    CHECK(curve.zeta[i] <= 1e-15);
    if (i > 0) CHECK(curve.zeta[i] <= curve.zeta[i - 1] + 1e-14);
    if (i > 0 && i + 1 < curve.zeta.size()) {
      CHECK(curve.zeta[i - 1] + curve.zeta[i + 1] - 2.0 * curve.zeta[i] >= -1e-12);
    }
  }
}

std::vector<double> grid(double lo, double hi, int steps) {
  std::vector<double> g;
  for (int i = 0; i <= steps; ++i) g.push_back(lo + (hi - lo) * i / steps);
  return g;
}

}  // namespace

TEST_SUITE("cgf") {

TEST_CASE("closed form against the Romberg oracle") {
  for (double p : {0.55, 0.6, 0.7, 0.75, 0.8, 0.9, 0.95}) {
    for (double lambda : {0.01, 0.1, 0.5, 1.0, 5.0, 20.0}) {
      CAPTURE(p);
      CAPTURE(lambda);
      CHECK(std::fabs(cgf_closed_form_k1(p, lambda) - oracle_zeta(p, lambda)) < 1e-10);
    }
  }
}

TEST_CASE("closed form regression values") {
  // frozen from the Romberg oracle above
  CHECK(oracle_zeta(0.75, 1.0) == doctest::Approx(-0.206454291480743).epsilon(1e-12));
  CHECK(cgf_closed_form_k1(0.75, 1.0) == doctest::Approx(-0.206454291480743).epsilon(1e-12));
  const double z6 = cgf_closed_form_k1(0.6, 0.5);
  const double z9 = cgf_closed_form_k1(0.9, 0.5);
  CHECK(z6 == doctest::Approx(-0.200928772513078).epsilon(1e-12));
  CHECK(z9 == doctest::Approx(-0.0599868683450787).epsilon(1e-12));
  CHECK(std::fabs(z6) > std::fabs(z9));
}

TEST_CASE("closed form limits and errors") {
  CHECK(std::fabs(cgf_closed_form_k1(0.75, 1e-6)) < 1e-4);
  // zeta(inf) = log(1 - pi(0)) = log p
  CHECK(cgf_closed_form_k1(0.7, 40.0) == doctest::Approx(std::log(0.7)).epsilon(1e-10));
  CHECK_THROWS_AS(cgf_closed_form_k1(0.5, 1.0), Error);
  CHECK_THROWS_AS(cgf_closed_form_k1(1.0, 1.0), Error);
  CHECK_THROWS_AS(cgf_closed_form_k1(0.7, 0.0), Error);
  CHECK_THROWS_AS(cgf_closed_form_k1(0.7, -1.0), Error);
}

TEST_CASE("ODE against the closed form") {
  const auto lam = grid(0.01, 5.0, 499);
  for (double p : {0.6, 0.75, 0.9}) {
    const auto ode = cgf_ode(UrnFunction::linear(p), lam);
    const auto cf = cgf_closed_form_k1(p, lam);
    double worst = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) worst = std::max(worst, std::fabs(ode.zeta[i] - cf.zeta[i]));
    CAPTURE(p);
    CHECK(worst < 1e-6);
    check_shape(ode);
    check_shape(cf);
  }
}

TEST_CASE("ODE initial slope selects the lowest stable fixed point") {
  // the correction to the slope is of order lambda^{1/slope - 1}, so keep pi' at the attractor well below 1
  const double lam[] = {1e-4, 2e-4};
  for (const auto& f : {UrnFunction::majority(3, 0.9), UrnFunction::majority(3, 0.95), UrnFunction::linear(0.6)}) {
    const auto z = cgf_ode(f, lam).zeta;
    double s = 1.0;
    for (const auto& cp : find_crossings(f)) {
      if (cp.stability != Stability::Unstable) s = std::min(s, cp.y_star);
    }
    CAPTURE(f.to_string());
    CHECK(-(z[1] - z[0]) / 1e-4 == doctest::Approx(s).epsilon(2e-2));
  }
}

TEST_CASE("ODE preconditions") {
  const double lam[] = {0.1, 1.0};
  CHECK_THROWS_AS(cgf_ode(UrnFunction::linear(0.4), lam), Error);
  CHECK_THROWS_AS(cgf_ode(UrnFunction::step_limit(0.8), lam), Error);
  const double bad[] = {0.0, 1.0};
  CHECK_THROWS_AS(cgf_ode(UrnFunction::linear(0.7), bad), Error);
}

TEST_CASE("finite-N oracle") {
  const auto f = UrnFunction::linear(0.75);
  const auto table = forward_distribution(f, {}, 1000);
  const double lam[] = {0.0, 0.5, 1.0, 30.0, 40.0};
  const auto z = cgf_finite_n(table, lam).zeta;
  CHECK(z[0] == 0.0);
  // large lambda: dominated by the smallest count, slope -c_min / N
  CHECK((z[4] - z[3]) / 10.0 == doctest::Approx(-1.0 / 1000.0).epsilon(1e-6));
  check_shape(cgf_finite_n(table, grid(0.0, 5.0, 100)));
}

TEST_CASE("Legendre transform") {
  const auto lam = grid(0.01, 40.0, 3999);
  const auto f = UrnFunction::linear(0.75);
  const double at_attractor[] = {0.5};
  CHECK(std::fabs(legendre(cgf_ode(f, lam), at_attractor).phi[0]) < 5e-3);

  const auto g = UrnFunction::linear(0.6);
  const double y[] = {0.3};
  const auto leg = legendre(cgf_ode(g, lam), y);
  CHECK_FALSE(leg.warning);
  const auto dp = entropy_estimate(g, {}, 2000, 4000, y);
  CHECK(leg.phi[0] == doctest::Approx(dp.phi_extrap[0]).epsilon(1e-2 / std::fabs(dp.phi_extrap[0])));

  // a short grid cannot reach the minimizer for y near 0
  const auto short_lam = grid(0.01, 1.0, 99);
  const double low[] = {0.05};
  const auto cut = legendre(cgf_ode(f, short_lam), low);
  CHECK(cut.warning);
  CHECK(cut.at_boundary[0]);
}

TEST_CASE("Legendre transform of the ODE below the attractor") {
  const auto lam = grid(0.01, 40.0, 3999);
  const auto ys = grid(0.1, 0.45, 7);
  const auto f = UrnFunction::majority(3, 0.8);
  const auto leg = legendre(cgf_ode(f, lam), ys);
  const auto dp = entropy_estimate(f, {}, 2000, 4000, ys);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    CAPTURE(ys[i]);
    CHECK(std::fabs(leg.phi[i] - dp.phi_extrap[i]) <= 1e-2);
  }
  // flat between the lower attractor and 1/2
  const auto g = UrnFunction::majority(3, 0.9);
  const double flat[] = {0.2, 0.3, 0.4, 0.45};
  for (double v : legendre(cgf_ode(g, lam), flat).phi) CHECK(std::fabs(v) <= 1e-2);
}

TEST_CASE("finite N against the closed form at lambda = 1") {
  const double lam[] = {1.0};
  const auto z = cgf_finite_n(UrnFunction::linear(0.75), {}, 4000, lam).zeta[0];
  CHECK(std::fabs(z - cgf_closed_form_k1(0.75, 1.0)) <= 2e-3);
}

TEST_CASE("singularity report") {
  const auto r34 = singularity_report(0.75);
  CHECK(r34.exponent == doctest::Approx(2.0));
  CHECK(r34.integer_exponent);
  CHECK(r34.first_singular_derivative == 2);
  const auto r7 = singularity_report(0.7);
  CHECK(r7.exponent == doctest::Approx(2.5));
  CHECK_FALSE(r7.integer_exponent);
  CHECK(r7.first_singular_derivative == 3);
  const auto r99 = singularity_report(0.999999);
  CHECK(r99.exponent > 1.0);
  CHECK(r99.exponent < 1.00001);
  for (double p = 0.51; p < 1.0; p += 0.01) {
    const auto r = singularity_report(p);
    CHECK(r.exponent > 1.0);
    CHECK((r.first_singular_derivative == 2) == (p >= 0.75 - 1e-12));
  }
  CHECK_THROWS_AS(singularity_report(0.5), Error);
  CHECK_THROWS_AS(singularity_report(1.0), Error);
}

TEST_CASE("curvature probe is the scaled variance") {
  const auto f = UrnFunction::linear(0.8);
  const std::int64_t hs[] = {500, 1000};
  const auto probe = cgf_curvature_probe(f, {}, hs);
  const auto tables = forward_distribution_snapshots(f, {}, hs);
  for (std::size_t i = 0; i < 2; ++i) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t c = 0; c < tables[i].log_prob.size(); ++c) {
      const double w = std::exp(tables[i].log_prob[c]);
      m1 += w * static_cast<double>(c);
      m2 += w * static_cast<double>(c) * static_cast<double>(c);
    }
    const double var_over_n = (m2 - m1 * m1) / static_cast<double>(hs[i]);
    CHECK(probe.second_difference[i] == doctest::Approx(var_over_n).epsilon(1e-2));
  }
}

}  // TEST_SUITE
