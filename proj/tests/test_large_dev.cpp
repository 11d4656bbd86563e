#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "erw/equilibria.hpp"
#include "erw/error.hpp"
#include "erw/exact_dist.hpp"
#include "erw/large_dev.hpp"
#include "erw/parallel.hpp"

using namespace erw;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an erw::Error");
  return ErrorKind::Domain;
}

}  // namespace

TEST_SUITE("large_dev") {

TEST_CASE("local cost values") {
  CHECK(local_cost(0.5, 0.5) == 0.0);
  // 0.5 ln 0.5 + 0.5 ln 1.5
  CHECK(local_cost(0.5, 0.25) == doctest::Approx(-0.143841036225890).epsilon(1e-12));
  CHECK(local_cost(0.0, 0.3) == doctest::Approx(std::log(0.7)).epsilon(1e-14));
  CHECK(local_cost(1.0, 0.3) == doctest::Approx(std::log(0.3)).epsilon(1e-14));
  CHECK(local_cost(0.4, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK(local_cost(0.4, 1.0) == -std::numeric_limits<double>::infinity());
  CHECK(local_cost(0.0, 0.0) == 0.0);
  CHECK(kind_of([] { (void)local_cost(1.2, 0.5); }) == ErrorKind::Domain);
  CHECK(kind_of([] { (void)local_cost(0.5, -0.1); }) == ErrorKind::Domain);
}

TEST_CASE("local cost is non-positive, zero only on the diagonal, concave in alpha") {
  for (int i = 0; i <= 40; ++i) {
    for (int j = 1; j < 40; ++j) {
      const double a = i / 40.0;
      const double b = j / 40.0;
      const double v = local_cost(a, b);
      CHECK(v <= 0.0);
      if (i != j) CHECK(v < 0.0);
      if (i >= 1 && i <= 39) {
        const double lo = local_cost(a - 1.0 / 40.0, b);
        const double hi = local_cost(a + 1.0 / 40.0, b);
        CHECK(v >= 0.5 * (lo + hi) - 1e-15);
      }
    }
  }
}

TEST_CASE("straight lines") {
  const auto f = UrnFunction::linear(0.75);
  // phi / tau = 0.9 everywhere, so the integrand is the constant -L(0.9, 0.7)
  const double expected = -(0.9 * std::log(0.7 / 0.9) + 0.1 * std::log(0.3 / 0.1));
  const auto r = rate_functional(f, straight_line(0.9, 1000));
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r.value == doctest::Approx(0.116322).epsilon(1e-6));
  CHECK(r.error_estimate < 1e-12);

  const auto g = UrnFunction::majority(3, 0.9);
  const double y_plus = attractors_k3(0.9).y_plus;
  CHECK(rate_functional(g, straight_line(y_plus, 500)).value < 1e-14);
  CHECK(rate_functional(g, straight_line(0.5, 500)).value < 1e-14);
}

TEST_CASE("trajectory validation") {
  auto t = straight_line(0.5, 10);
  t.phi[5] += 0.2;  // slope above 1 into cell 5
  CHECK(kind_of([&] { (void)rate_functional(UrnFunction::linear(0.7), t); }) ==
        ErrorKind::InvalidTrajectory);
  auto s = straight_line(0.5, 10);
  s.phi[0] = 0.01;
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::InvalidTrajectory);
  auto u = straight_line(0.5, 10);
  u.tau[3] += 0.01;
  CHECK(kind_of([&] { u.validate(); }) == ErrorKind::InvalidTrajectory);
  auto v = straight_line(0.5, 10);
  v.phi.pop_back();
  CHECK(kind_of([&] { v.validate(); }) == ErrorKind::InvalidTrajectory);
}

TEST_CASE("zero-cost trajectories cost nothing; perturbations cost more the larger they are") {
  const auto f = UrnFunction::majority(3, 0.9);
  const auto traj = zero_cost_trajectory(f, 0.5, 1, 1e-2, 10000);
  CHECK_NOTHROW(traj.validate());
  CHECK(rate_functional(f, traj).value < 1e-6);
  CHECK(traj.endpoint() > 0.5);

  double previous = 0.0;
  for (double delta : {0.005, 0.01, 0.02, 0.04}) {
    auto bent = traj;
    for (std::size_t i = 0; i < bent.tau.size(); ++i) {
      const double t = bent.tau[i];
      bent.phi[i] += delta * t * (1.0 - t);
    }
    const double cost = rate_functional(f, bent).value;
    CHECK(cost > previous + 1e-6);
    previous = cost;
  }
}

TEST_CASE("zero offset stays on the fixed point") {
  const auto f = UrnFunction::majority(3, 0.9);
  const auto traj = zero_cost_trajectory(f, 0.5, 1, 0.0, 100);
  for (double u : traj.u) CHECK(u == 0.5);
  CHECK(traj.endpoint() == 0.5);
}

TEST_CASE("trajectories launched further out stay above on every grid point") {
  const auto f = UrnFunction::majority(5, 0.9);
  const std::vector<double> eps{1e-7, 1e-5, 1e-3, 1e-2, 0.05, 0.1};
  for (int dir : {1, -1}) {
    const auto fam = zero_cost_family(f, 0.5, dir, eps, 2000);
    for (std::size_t j = 1; j < fam.size(); ++j) {
      for (std::size_t i = 1; i < fam[j].tau.size(); ++i) {
        CHECK(dir * fam[j].u[i] > dir * fam[j - 1].u[i]);
      }
    }
  }
}

TEST_CASE("endpoints fill the band and never pass the attractors") {
  const auto f = UrnFunction::majority(3, 0.9);
  const auto pair = attractors_k3(0.9);
  const double gap = pair.y_plus - 0.5;
  std::vector<double> eps;
  for (double e = 1e-9; e < gap; e *= 1.5) eps.push_back(e);
  for (double r = 0.1; r > 1e-7; r /= 10.0) eps.push_back(gap * (1.0 - r));
  double hi = 0.5;
  for (double e : eps) {
    const double end = zero_cost_endpoint(f, 0.5, 1, e);
    CHECK(end < pair.y_plus + 1e-12);
    hi = std::max(hi, end);
  }
  CHECK(pair.y_plus - hi < 1e-4);
  const double lo = zero_cost_endpoint(f, 0.5, -1, gap * (1.0 - 1e-6));
  CHECK(lo - pair.y_minus < 1e-4);
  CHECK(lo > pair.y_minus - 1e-12);
}

TEST_CASE("offset search hits the requested endpoint") {
  const auto f = UrnFunction::majority(3, 0.9);
  for (double target : {0.55, 0.7, 0.85}) {
    const double eps = zero_cost_offset_for(f, 0.5, 1, target);
    CHECK(zero_cost_endpoint(f, 0.5, 1, eps) == doctest::Approx(target).epsilon(1e-8));
  }
  const double eps = zero_cost_offset_for(f, 0.5, -1, 0.3);
  CHECK(zero_cost_endpoint(f, 0.5, -1, eps) == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(kind_of([&] { (void)zero_cost_offset_for(f, 0.5, 1, 0.9); }) == ErrorKind::Domain);
}

TEST_CASE("launch errors") {
  const auto f = UrnFunction::majority(3, 0.9);
  const double y_plus = attractors_k3(0.9).y_plus;
  CHECK(kind_of([&] { (void)zero_cost_trajectory(f, y_plus, 1, 1e-3, 10); }) == ErrorKind::NoEscape);
  CHECK(kind_of([] { (void)zero_cost_endpoint(UrnFunction::linear(0.7), 0.5, 1, 1e-3); }) ==
        ErrorKind::NoEscape);
  CHECK(kind_of([&] { (void)zero_cost_endpoint(f, 0.5, 1, 0.4); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { (void)zero_cost_endpoint(f, 0.4, 1, 0.01); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { (void)zero_cost_endpoint(f, 0.5, 2, 0.01); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { (void)zero_cost_endpoint(UrnFunction::step_limit(0.9), 0.5, 1, 0.01); }) ==
        ErrorKind::Unsupported);
}

TEST_CASE("Bellman lattice") {
  const std::vector<double> ys{0.1, 0.3, 0.5, 0.9, 1.0};
  const auto f = UrnFunction::linear(0.75);
  set_thread_count(4);
  const auto a = entropy_variational(f, ys);
  set_thread_count(0);
  const auto b = entropy_variational_serial(f, ys);
  CHECK(a.phi == b.phi);
  for (double v : a.phi) CHECK(v <= 0.0);
  CHECK(std::fabs(a.phi[2]) < 5e-3);
  // the best path does at least as well as the straight line
  CHECK(a.phi[3] >= -rate_functional(f, straight_line(0.9, 1000)).value - 1e-3);
  CHECK(a.phi[4] == doctest::Approx(std::log(0.75)).epsilon(1e-2));

  const auto g = UrnFunction::majority(3, 0.9);
  const double inside[] = {0.3, attractors_k3(0.9).y_plus};
  for (double v : entropy_variational(g, inside).phi) CHECK(std::fabs(v) < 5e-3);

  CHECK(kind_of([&] { (void)entropy_variational(f, ys, BellmanMesh{100, 8000}); }) ==
        ErrorKind::InvalidParameter);
  CHECK(kind_of([&] { (void)entropy_variational(f, ys, BellmanMesh{200, 8100}); }) ==
        ErrorKind::InvalidParameter);
  const double outside[] = {1.2};
  CHECK(kind_of([&] { (void)entropy_variational(f, outside); }) == ErrorKind::Domain);
}

TEST_CASE("Bellman entropy matches the extrapolated exact law") {
  std::vector<double> ys;
  for (int i = 1; i <= 9; ++i) ys.push_back(i / 10.0);
  for (const auto& f : {UrnFunction::linear(0.6), UrnFunction::linear(0.75), UrnFunction::majority(3, 0.8),
                        UrnFunction::majority(3, 0.9)}) {
    const auto bell = entropy_variational(f, ys);
    const auto dp = entropy_estimate(f, {}, 2000, 4000, ys);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      CAPTURE(f.to_string());
      CAPTURE(ys[i]);
      CHECK(std::fabs(bell.phi[i] - dp.phi_extrap[i]) <= 5e-3);
    }
  }
}

}  // TEST_SUITE
